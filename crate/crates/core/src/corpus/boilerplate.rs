//! Header/footer boilerplate removal and pediatric-department detection.

/// A line prefix identifying a header or footer line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoilerplateMarker {
    /// Lowercase prefix matched against the trimmed line.
    pub prefix: &'static str,
    /// Applied only before the first kept content line.
    pub start_only: bool,
}

const fn m(prefix: &'static str) -> BoilerplateMarker {
    BoilerplateMarker {
        prefix,
        start_only: false,
    }
}

const fn s(prefix: &'static str) -> BoilerplateMarker {
    BoilerplateMarker {
        prefix,
        start_only: true,
    }
}

/// Header/footer identifiers used for Italian discharge letters.
pub const BOILERPLATE_MARKERS: &[BoilerplateMarker] = &[
    m("regione"),
    m("azienda"),
    s("dipartimento"),
    s("pronto soccorso pediatrico"),
    s("u.o.c"),
    s("uoc "),
    s("operativa"),
    s("accettazione"),
    s("u.o"),
    s("uo "),
    s("uo."),
    s("u.l.s.s."),
    s("ulss"),
    s("ospedale"),
    s("presidio ospedaliero"),
    s("via"),
    m("punto di primo intervento"),
    s("pediatria"),
    s("verbale"),
    m("pag."),
    m("pag "),
    m("pagina"),
    s("nato"),
    m("tess.san"),
    m("codice fiscale"),
    m("comune di nascita"),
    m("cap"),
    m("indirizzo"),
    m("cartella dea"),
    m("documento firmato digitalmente"),
    m("informazione ai sensi"),
    m("il medico dimettente"),
    m("gentile signor"),
    m("copia di documento firmato e conservato"),
    m("desideriamo renderla partecipe"),
    m("modulo di pronto soccorso"),
    s("direttore"),
    m("ai genitori"),
    m("al medico"),
    m("residente"),
    m("residenza"),
    m("nome"),
    m("cognome"),
    m("firma"),
    m("consegnare al proprio pediatra"),
    m("l'orario di alcune prestazioni"),
    m("verbale di pronto soccorso"),
    s("della cartella"),
    m("modulo di"),
    m("numero di certificato"),
    m("firmatario"),
    m("il referto e' conservato"),
    m("id documento"),
    m("gentile signore"),
    m("informazione"),
    m("dettagli paziente"),
    m("verbale n"),
    s("priorita"),
    m("tel"),
    m("fax"),
    m("domicilio"),
    m("segreteria"),
    m("data e ora"),
];

/// Keywords marking a pediatric ER or department in the letter header.
pub const PEDIATRIC_KEYWORDS: &[&str] = &[
    "pediatria",
    "pediatrico",
    "pediatrica",
    "pediatrici",
    "pediatriche",
];

/// Kept lines after the boilerplate that still count as header.
pub const HEADER_KEPT_LINES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LineFate {
    Removed,
    Kept,
}

/// Marker whose prefix opens `line`, honouring the document-start rule.
fn matching_marker(line: &str, in_header: bool) -> Option<&'static BoilerplateMarker> {
    let trimmed = line.trim_start().to_lowercase();
    BOILERPLATE_MARKERS.iter().find(|marker| {
        if marker.start_only && !in_header {
            return false;
        }
        let Some(rest) = trimmed.strip_prefix(marker.prefix) else {
            return false;
        };
        // Word-like prefixes must end at a word boundary: "cap" is not "capogiro".
        let open_ended = marker
            .prefix
            .chars()
            .last()
            .is_some_and(|c| !c.is_alphanumeric());
        open_ended || rest.chars().next().is_none_or(|c| !c.is_alphanumeric())
    })
}

fn classify_lines(text: &str) -> impl Iterator<Item = (&str, LineFate)> {
    let mut in_header = true;
    text.split('\n').map(move |line| {
        if matching_marker(line, in_header).is_some() {
            (line, LineFate::Removed)
        } else {
            if !line.trim().is_empty() {
                in_header = false;
            }
            (line, LineFate::Kept)
        }
    })
}

/// Remove header and footer lines. Start-only markers apply until the first
/// non-blank kept line; other lines pass through verbatim.
pub fn strip_boilerplate(text: &str) -> String {
    classify_lines(text)
        .filter(|(_, fate)| *fate == LineFate::Kept)
        .map(|(line, _)| line)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Whether a pediatric keyword appears as a whole word in the header region:
/// every removed boilerplate line plus the first [`HEADER_KEPT_LINES`]
/// non-blank kept lines.
pub fn detect_pediatric(text: &str) -> bool {
    let mut kept = 0;
    for (line, fate) in classify_lines(text) {
        let inspect = match fate {
            LineFate::Removed => true,
            LineFate::Kept if line.trim().is_empty() => false,
            LineFate::Kept => {
                kept += 1;
                kept <= HEADER_KEPT_LINES
            }
        };
        if inspect && has_pediatric_keyword(line) {
            return true;
        }
    }
    false
}

fn has_pediatric_keyword(line: &str) -> bool {
    line.to_lowercase()
        .split(|c: char| !c.is_alphabetic())
        .any(|word| PEDIATRIC_KEYWORDS.contains(&word))
}
