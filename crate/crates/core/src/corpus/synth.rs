//! Deterministic synthetic discharge-letter generator.
//!
//! Letters are assembled from a header (hospital, LHU, department), an
//! optional diagnosis section, a clinical-course body mixing generic and
//! disease-specific sentences, discharge advice and a footer. Gold labels are
//! planted at generation time: a letter is positive iff it was generated from
//! the target disease.
//!
//! Templates use `{a|b|}` groups; each group expands to one alternative drawn
//! uniformly (the empty alternative is allowed).

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Corpus, Letter, Provenance};
use crate::error::{Error, Result};

/// Diagnosis and clinical-course templates for one disease.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiseaseTemplates {
    /// Relative frequency among non-target letters; ignored for the target.
    pub weight: f64,
    /// Diagnosis phrase templates; repeat an entry to make it more likely.
    pub diagnosis: Vec<String>,
    /// Disease-specific clinical-course sentences.
    #[serde(default)]
    pub course: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisConfig {
    pub n_letters: usize,
    pub target_prevalence: f64,
    pub n_hospitals: usize,
    pub n_lhus: usize,
    pub pediatric_fraction: f64,
    pub diagnosis_section_rate: f64,
    pub noise_rate: f64,
    pub target_disease: String,
    pub disease_templates: BTreeMap<String, DiseaseTemplates>,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            n_letters: 2000,
            target_prevalence: 0.03,
            n_hospitals: 12,
            n_lhus: 4,
            pediatric_fraction: 0.3,
            diagnosis_section_rate: 0.89,
            noise_rate: 0.1,
            target_disease: "bronchiolite".into(),
            disease_templates: default_disease_templates(),
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_letters == 0 {
            return fail("n_letters must be positive".into());
        }
        if !(self.target_prevalence > 0.0 && self.target_prevalence < 1.0) {
            return fail("target_prevalence must lie in (0, 1)".into());
        }
        if self.target_prevalence * (self.n_letters as f64) < 1.0 {
            return fail("target_prevalence * n_letters must be at least 1".into());
        }
        if self.n_hospitals == 0 || self.n_lhus == 0 {
            return fail("n_hospitals and n_lhus must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.pediatric_fraction) {
            return fail("pediatric_fraction must lie in [0, 1]".into());
        }
        if !(self.diagnosis_section_rate > 0.0 && self.diagnosis_section_rate <= 1.0) {
            return fail("diagnosis_section_rate must lie in (0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return fail("noise_rate must lie in [0, 1]".into());
        }
        let Some(target) = self.disease_templates.get(&self.target_disease) else {
            return fail(format!("no templates for target disease {:?}", self.target_disease));
        };
        if target.diagnosis.is_empty() {
            return fail("target disease needs at least one diagnosis template".into());
        }
        let distractors: Vec<_> = self.distractors().collect();
        if distractors.is_empty() {
            return fail("at least one non-target disease is required".into());
        }
        for (name, t) in &self.disease_templates {
            if t.diagnosis.is_empty() {
                return fail(format!("disease {name:?} has no diagnosis templates"));
            }
            if !(t.weight.is_finite() && t.weight >= 0.0) {
                return fail(format!("disease {name:?} has an invalid weight"));
            }
        }
        if distractors.iter().all(|(_, t)| t.weight == 0.0) {
            return fail("non-target disease weights sum to zero".into());
        }
        Ok(())
    }

    /// Planted positive count: prevalence times size, rounded half up.
    pub fn positive_count(&self) -> usize {
        (self.target_prevalence * self.n_letters as f64 + 0.5).floor() as usize
    }

    fn distractors(&self) -> impl Iterator<Item = (&String, &DiseaseTemplates)> {
        self.disease_templates
            .iter()
            .filter(move |(name, _)| **name != self.target_disease)
    }
}

/// Generate a corpus; identical `(config, seed)` pairs give identical corpora.
pub fn generate_synthetic(config: &SynthesisConfig, seed: u64) -> Result<Corpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.n_letters;

    let mut positive = vec![false; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for &i in order.iter().take(config.positive_count()) {
        positive[i] = true;
    }

    let hospital_weights: Vec<f64> = (0..config.n_hospitals).map(|i| 1.0 / (i as f64 + 1.0)).collect();
    let distractors: Vec<(&String, &DiseaseTemplates)> = config.distractors().collect();
    let distractor_weights: Vec<f64> = distractors.iter().map(|(_, t)| t.weight).collect();
    let target = &config.disease_templates[&config.target_disease];
    let start = NaiveDate::from_ymd_opt(2017, 1, 1).expect("valid date");

    let mut letters = Vec::with_capacity(n);
    for (i, &is_positive) in positive.iter().enumerate() {
        let hospital = weighted_index(&mut rng, &hospital_weights);
        let lhu = hospital % config.n_lhus;
        let (disease, templates) = if is_positive {
            (config.target_disease.as_str(), target)
        } else {
            let (name, t) = distractors[weighted_index(&mut rng, &distractor_weights)];
            (name.as_str(), t)
        };
        let spec = LetterSpec {
            pediatric: rng.random_bool(config.pediatric_fraction),
            has_section: rng.random_bool(config.diagnosis_section_rate),
            noise: rng.random_bool(config.noise_rate).then(|| rng.random_range(0..4u8)),
            hospital,
        };
        let text = compose_letter(&mut rng, &spec, disease, &config.target_disease, templates);
        let date = start + Duration::days(rng.random_range(0..1461));
        letters.push(Letter::new(
            format!("L{i:05}"),
            format!("H-{hospital:02}"),
            format!("LHU-{lhu}"),
            Some(date),
            text,
            Some(is_positive),
        )?);
    }
    Corpus::new(letters, Provenance::Synthetic, Some(seed))
}

struct LetterSpec {
    pediatric: bool,
    has_section: bool,
    /// Kind of textual noise: typo, trailing advice clause, code prefix, or a
    /// confounding mention of the target disease in the body.
    noise: Option<u8>,
    hospital: usize,
}

fn compose_letter(
    rng: &mut ChaCha8Rng,
    spec: &LetterSpec,
    disease: &str,
    target: &str,
    templates: &DiseaseTemplates,
) -> String {
    let mut lines: Vec<String> = Vec::new();
    lines.push("REGIONE VENETO - SERVIZIO SANITARIO NAZIONALE".into());
    lines.push(format!("Azienda ULSS n. {}", spec.hospital % 9 + 1));
    lines.push(format!("Presidio Ospedaliero di {}", pick(rng, TOWNS)));
    let department = if spec.pediatric {
        pick(rng, PEDIATRIC_DEPARTMENTS)
    } else {
        pick(rng, ADULT_DEPARTMENTS)
    };
    lines.push(department.to_string());
    lines.push(format!("Data e ora di ricovero: {:02}/{:02}", rng.random_range(1..29), rng.random_range(1..13)));
    lines.push("Egregio Collega,".into());
    lines.push("si dimette in data odierna il paziente.".into());

    let diagnosis = spec.has_section.then(|| {
        let template = pick(rng, &templates.diagnosis);
        let mut phrase = expand(rng, template);
        match spec.noise {
            Some(0) => phrase = typo(rng, &phrase),
            Some(1) => {
                phrase.push_str(pick(rng, TRAILING_ADVICE));
            }
            Some(2) => phrase = format!("{} {}", icd_like(rng), phrase.to_uppercase()),
            _ => {}
        }
        diagnosis_section(rng, &phrase)
    });
    let diagnosis_at_end = rng.random_bool(0.2);
    if !diagnosis_at_end {
        if let Some(section) = &diagnosis {
            lines.extend(section.iter().cloned());
        }
    }

    lines.push("Decorso Clinico e Conclusioni:".into());
    let mut body: Vec<String> = Vec::new();
    let n_generic = rng.random_range(4..9);
    body.extend(sample(rng, GENERIC_COURSE, n_generic).into_iter().map(str::to_string));
    if !templates.course.is_empty() {
        let n_specific = rng.random_range(3..=5.min(templates.course.len()).max(3));
        body.extend(sample(rng, &templates.course, n_specific).into_iter().map(|s| expand(rng, s)));
    }
    if spec.noise == Some(3) && disease != target {
        body.push(pick(rng, CONFOUNDERS).replace("{target}", target));
    }
    if rng.random_bool(0.1) {
        let extra = rng.random_range(30..50);
        for _ in 0..extra {
            body.push(pick(rng, GENERIC_COURSE).to_string());
        }
    }
    body.shuffle(rng);
    lines.extend(body.into_iter().map(|s| format!(" {s}")));

    if diagnosis_at_end {
        if let Some(section) = &diagnosis {
            lines.extend(section.iter().cloned());
        }
    }
    lines.push("Programma alla dimissione:".into());
    lines.push(format!(" {}", pick(rng, ADVICE)));
    lines.push("Consigli Clinici:".into());
    lines.push(" Si consiglia controllo presso il pediatra curante nei prossimi giorni.".into());
    lines.push("Cordiali saluti".into());
    lines.push(format!("Dr. {}", pick(rng, SURNAMES)));
    lines.push("INFORMAZIONE".into());
    lines.push("Gentile signore/ signora, desideriamo renderla partecipe dei costi del percorso di cura.".into());
    lines.push(format!("Pag. 1 di {}", rng.random_range(1..3)));
    lines.push("Documento firmato digitalmente".into());
    lines.join("\n")
}

fn diagnosis_section(rng: &mut ChaCha8Rng, phrase: &str) -> Vec<String> {
    let heading = pick(rng, SECTION_HEADINGS);
    if rng.random_bool(0.5) {
        vec![format!("{heading}: {phrase}")]
    } else {
        vec![format!("{heading}:"), format!(" {phrase}")]
    }
}

fn weighted_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

fn pick<'a, S: AsRef<str>>(rng: &mut ChaCha8Rng, items: &'a [S]) -> &'a str {
    items.choose(rng).expect("non-empty template list").as_ref()
}

fn sample<'a, S: AsRef<str>>(rng: &mut ChaCha8Rng, items: &'a [S], k: usize) -> Vec<&'a str> {
    items
        .choose_multiple(rng, k.min(items.len()))
        .map(AsRef::as_ref)
        .collect()
}

/// Expand every `{a|b|c}` group to one alternative.
pub(crate) fn expand(rng: &mut ChaCha8Rng, template: &str) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let Some(close) = rest[open..].find('}') else {
            out.push_str(&rest[open..]);
            return out;
        };
        let group = &rest[open + 1..open + close];
        let options: Vec<&str> = group.split('|').collect();
        out.push_str(options.choose(rng).expect("split yields at least one item"));
        rest = &rest[open + close + 1..];
    }
    out.push_str(rest);
    out
}

fn typo(rng: &mut ChaCha8Rng, phrase: &str) -> String {
    let words: Vec<&str> = phrase.split(' ').collect();
    let candidates: Vec<usize> = (0..words.len()).filter(|&i| words[i].chars().count() >= 6).collect();
    let Some(&w) = candidates.choose(rng) else {
        return phrase.to_string();
    };
    let mut chars: Vec<char> = words[w].chars().collect();
    let pos = rng.random_range(1..chars.len() - 1);
    match rng.random_range(0..3) {
        0 => chars.swap(pos, pos + 1),
        1 => {
            chars.remove(pos);
        }
        _ => chars.insert(pos, chars[pos]),
    }
    let mut out: Vec<String> = words.iter().map(|s| s.to_string()).collect();
    out[w] = chars.into_iter().collect();
    out.join(" ")
}

fn icd_like(rng: &mut ChaCha8Rng) -> String {
    format!("{}.{}", rng.random_range(1..999), rng.random_range(0..99))
}

const SECTION_HEADINGS: &[&str] = &[
    "Diagnosi",
    "Diagnosi",
    "Diagnosi",
    "DIAGNOSI",
    "Diagnosi di dimissione",
    "Diagnosi alla dimissione",
    "Diagnosi testuale",
];

const TOWNS: &[&str] = &["Padova", "Treviso", "Vicenza", "Verona", "Rovigo", "Belluno", "Schio", "Feltre"];

const PEDIATRIC_DEPARTMENTS: &[&str] = &[
    "Unita' Operativa di Pediatria Degenze",
    "UOC Pediatria - Pronto Soccorso Pediatrico",
    "Pronto Soccorso Pediatrico",
    "Unita' Operativa Complessa di Pediatria",
];

const ADULT_DEPARTMENTS: &[&str] = &[
    "Pronto Soccorso Generale",
    "Unita' Operativa di Medicina d'Urgenza",
    "Unita' Operativa di Chirurgia Generale",
    "Punto di Primo Intervento",
];

const SURNAMES: &[&str] = &["Rossi", "Bianchi", "Ferrari", "Esposito", "Romano", "Gallo", "Costa", "Fontana"];

const TRAILING_ADVICE: &[&str] = &[
    ". a domicilio aerosol con broncovaleas",
    "; controllo dal curante tra tre giorni",
    ". consiglio riposo e idratazione",
    ", consigli terapeutici: paracetamolo al bisogno.",
];

const CONFOUNDERS: &[&str] = &[
    "In anamnesi pregressa {target} nel primo anno di vita.",
    "Esclusa {target} in base al quadro clinico.",
    "Fratello ricoverato di recente per {target}.",
];

const ADVICE: &[&str] = &[
    "A domicilio si consiglia riposo e adeguata idratazione.",
    "Proseguire la terapia in atto come da indicazioni.",
    "Paracetamolo al bisogno in caso di febbre.",
    "Rivalutazione in caso di peggioramento dei sintomi.",
];

const GENERIC_COURSE: &[&str] = &[
    "Condizioni generali buone.",
    "Condizioni generali discrete, paziente vigile e reattivo.",
    "Azione cardiaca ritmica, toni validi, non soffi.",
    "Addome piano, trattabile, non dolente alla palpazione.",
    "Organi ipocondriaci nei limiti.",
    "Faringe lievemente iperemico.",
    "Esame neurologico negativo.",
    "Non segni meningei.",
    "Eseguiti esami ematici risultati nella norma.",
    "Parametri vitali stabili durante la degenza.",
    "Alvo regolare, diuresi conservata.",
    "Cute e mucose rosee e ben idratate.",
    "Peso e crescita regolari per l'eta'.",
    "Vaccinazioni eseguite secondo calendario.",
    "Nessuna allergia nota a farmaci.",
    "Durante la permanenza in reparto buona tolleranza dell'alimentazione.",
    "Genitori informati sul decorso e sulle indicazioni.",
    "PCR nei limiti, emocromo senza alterazioni significative.",
    "Linfonodi laterocervicali non aumentati di volume.",
    "Otoscopia bilaterale nella norma.",
    "Murmure vescicolare presente su tutto l'ambito.",
    "Obiettivita' toracica nei limiti.",
];

fn templates(weight: f64, diagnosis: &[&str], course: &[&str]) -> DiseaseTemplates {
    DiseaseTemplates {
        weight,
        diagnosis: diagnosis.iter().map(|s| s.to_string()).collect(),
        course: course.iter().map(|s| s.to_string()).collect(),
    }
}

/// Default disease table: the target is bronchiolitis; distractors follow
/// the most frequent diagnoses of a pediatric emergency department.
pub fn default_disease_templates() -> BTreeMap<String, DiseaseTemplates> {
    let mut t = BTreeMap::new();
    t.insert(
        "bronchiolite".into(),
        templates(
            0.0,
            &[
                "{acuta bronchiolite|bronchiolite acuta|bronchiolite}{| iniziale}{| lieve}{| in lattante}",
                "{acuta bronchiolite|bronchiolite acuta|bronchiolite}{| iniziale}{| lieve}{| in lattante}",
                "{acuta bronchiolite|bronchiolite acuta|bronchiolite}{| iniziale}{| lieve}{| in lattante}",
                "{acuta bronchiolite|bronchiolite acuta|bronchiolite}{| iniziale}{| lieve}{| in lattante}",
                "{acuta bronchiolite|bronchiolite acuta|bronchiolite}{| iniziale}{| lieve}{| in lattante}",
                "{acuta bronchiolite|bronchiolite acuta|bronchiolite}{| iniziale}{| lieve}{| in lattante}",
                "{acuta bronchiolite|bronchiolite acuta|bronchiolite}{| iniziale}{| lieve}{| in lattante}",
                "{acuta bronchiolite|bronchiolite acuta|bronchiolite}{| iniziale}{| lieve}{| in lattante}",
                "{acuta bronchiolite|bronchiolite acuta|bronchiolite}{| iniziale}{| lieve}{| in lattante}",
                "{acuta bronchiolite|bronchiolite acuta|bronchiolite}{| iniziale}{| lieve}{| in lattante}",
                "{acuta bronchiolite|bronchiolite acuta|bronchiolite}{| iniziale}{| lieve}{| in lattante}",
                "{acuta bronchiolite|bronchiolite acuta|bronchiolite}{| iniziale}{| lieve}{| in lattante}",
                "{episodio di |}desaturazione {in|da|con|durante} bronchiolite{| grave| severa}",
                "{episodio di |}desaturazione {in|da|con|durante} bronchiolite{| grave| severa}",
                "{episodio di |}desaturazione {in|da|con|durante} bronchiolite{| grave| severa}",
                "{episodio di |}desaturazione {in|da|con|durante} bronchiolite{| grave| severa}",
                "{episodio di |}desaturazione {in|da|con|durante} bronchiolite{| grave| severa}",
                "{difficolta' di|difficolta' nella|rifiuto della|scarsa} alimentazione {in|da} bronchiolite{| moderata}",
                "{difficolta' di|difficolta' nella|rifiuto della|scarsa} alimentazione {in|da} bronchiolite{| moderata}",
                "{difficolta' di|difficolta' nella|rifiuto della|scarsa} alimentazione {in|da} bronchiolite{| moderata}",
            ],
            &[
                "All'ingresso sibili e rantoli crepitanti diffusi bilateralmente.",
                "Tampone nasale positivo per VRS.",
                "Lattante con difficolta' di alimentazione e rientramenti intercostali.",
                "Saturazione in aria ambiente {90|91|92}%, avviata ossigenoterapia ad alti flussi.",
                "Eseguiti lavaggi nasali e aspirazione delle secrezioni.",
                "Alitamento delle pinne nasali e tachipnea.",
                "Quadro clinico compatibile con bronchiolite.",
                "Progressivo miglioramento della dinamica respiratoria con ossigeno.",
            ],
        ),
    );
    t.insert(
        "virosi".into(),
        templates(
            9.0,
            &[
                "virosi{| respiratoria| febbrile| in atto}",
                "079.99 infezioni virali, non specificate",
                "infezione virale{| aspecifica| in atto}",
                "sindrome {virale|influenzale}{| con febbre| in atto}",
            ],
            &["Febbre da due giorni con faringe iperemico.", "Rinorrea e tosse stizzosa.", "Esami ematici compatibili con infezione virale."],
        ),
    );
    t.insert(
        "gastroenterite".into(),
        templates(
            7.0,
            &[
                "gastroenterite{| acuta}{| virale| da rotavirus}",
                "gastroenterite{| acuta} {con|senza} segni di disidratazione",
                "009.1 colite, enterite e gastroenterite di presunta origine infettiva",
                "enterite{| acuta}{| virale}",
                "diarrea{| acuta}{| con vomito| persistente}",
            ],
            &["Vomito e diarrea da 24 ore.", "Reidratazione orale ben tollerata.", "Addome meteorico con peristalsi vivace."],
        ),
    );
    t.insert(
        "trauma".into(),
        templates(
            6.0,
            &[
                "trauma cranico{| minore| non commotivo}",
                "trauma cranico{| minore} da caduta accidentale",
                "contusione {del ginocchio|della mano|del polso|della caviglia} {dx|sx}",
                "distorsione {della caviglia|del polso} {dx|sx}{| di primo grado}",
            ],
            &["Caduta accidentale dal fasciatoio.", "Nessuna perdita di coscienza riferita.", "Tumefazione locale senza deformita'."],
        ),
    );
    t.insert(
        "febbre".into(),
        templates(
            5.0,
            &["febbre{| di recente insorgenza| elevata| senza focolaio}", "780.6 febbre", "iperpiressia{| in corso| persistente}", "rialzo termico{| persistente| serale}"],
            &["Febbre elevata da 48 ore senza focolaio evidente.", "Esame urine negativo.", "Buona risposta agli antipiretici."],
        ),
    );
    t.insert(
        "dolore addominale".into(),
        templates(
            3.0,
            &["dolore addominale{| aspecifico| in fossa iliaca dx}", "addominalgia{| ricorrente| aspecifica}"],
            &["Ecografia addominale negativa.", "Dolore in regione periombelicale."],
        ),
    );
    t.insert(
        "orticaria".into(),
        templates(2.0, &["orticaria{| acuta| allergica}", "reazione orticarioide"], &["Pomfi diffusi pruriginosi al tronco.", "Somministrato antistaminico con beneficio."]),
    );
    t.insert(
        "broncospasmo".into(),
        templates(
            4.0,
            &[
                "broncospasmo{| acuto}{| in corso}",
                "519.11 broncospasmo acuto",
                "broncospasmo {e otite|parainfettivo|episodio}",
                "episodio di broncospasmo{| ricorrente| parainfettivo}",
                "crisi di broncospasmo{| acuto| ricorrente}",
            ],
            &[
                "Sibili espiratori diffusi, buona risposta ad aerosol con salbutamolo.",
                "Storia di episodi ricorrenti di broncospasmo.",
                "Somministrato cortisonico per os.",
            ],
        ),
    );
    t.insert(
        "otite".into(),
        templates(3.0, &["otite{| media}{| acuta}{| dx| sx}", "otalgia{| dx| sx}"], &["Membrana timpanica iperemica ed estroflessa.", "Avviata terapia antibiotica con amoxicillina."]),
    );
    t.insert(
        "alte vie".into(),
        templates(
            3.0,
            &["flogosi delle alte vie respiratorie", "infezione{| delle} alte vie respiratorie", "rinofaringite{| acuta}"],
            &["Rinite e tosse da alcuni giorni.", "Faringe iperemico con essudato."],
        ),
    );
    t.insert(
        "polmonite".into(),
        templates(
            2.0,
            &["polmonite{| lobare}{| dx| sx}", "broncopolmonite{| sinistra| destra}"],
            &["Rx torace: addensamento parenchimale.", "Rantoli crepitanti localizzati alla base.", "Avviata terapia antibiotica endovena."],
        ),
    );
    t.insert(
        "faringotonsillite".into(),
        templates(2.0, &["faringotonsillite{| acuta}{| virale| streptococcica}", "tonsillite{| essudativa}"], &["Tonsille ipertrofiche con essudato.", "Tampone faringeo rapido eseguito."]),
    );
    t.insert(
        "vomito".into(),
        templates(2.0, &["vomito{| ripetuto| incoercibile}", "vomito e inappetenza"], &["Vomito ripetuto dopo i pasti.", "Chetonuria presente."]),
    );
    t.insert(
        "laringite".into(),
        templates(2.0, &["laringite{| acuta| ipoglottica}", "laringospasmo"], &["Tosse abbaiante e stridore inspiratorio.", "Somministrato aerosol con adrenalina."]),
    );
    t.insert(
        "neonato".into(),
        templates(2.0, &["nato singolo, nato in ospedale senza menzione di taglio cesareo", "ittero neonatale{| fisiologico}"], &["Neonato a termine, adattamento regolare."]),
    );
    t.insert(
        "convulsione".into(),
        templates(1.0, &["convulsione febbrile{| semplice| complessa}"], &["Episodio critico di breve durata in corso di febbre."]),
    );
    t.insert(
        "vie urinarie".into(),
        templates(1.0, &["infezione delle vie urinarie{| febbrile}", "pielonefrite{| acuta}"], &["Stick urine positivo per leucociti e nitriti."]),
    );
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::strip_boilerplate;

    fn small(n: usize, prevalence: f64) -> SynthesisConfig {
        SynthesisConfig {
            n_letters: n,
            target_prevalence: prevalence,
            ..SynthesisConfig::default()
        }
    }

    fn jsonl(c: &Corpus) -> Vec<u8> {
        let mut buf = Vec::new();
        c.write_jsonl(&mut buf).unwrap();
        buf
    }

    #[test]
    fn deterministic() {
        let cfg = small(100, 0.05);
        let a = generate_synthetic(&cfg, 7).unwrap();
        let b = generate_synthetic(&cfg, 7).unwrap();
        assert_eq!(jsonl(&a), jsonl(&b));
        let c = generate_synthetic(&cfg, 8).unwrap();
        assert_ne!(jsonl(&a), jsonl(&c));
    }

    #[test]
    fn exact_positive_count() {
        let corpus = generate_synthetic(&small(2000, 0.03), 1).unwrap();
        let positives = corpus.iter().filter(|l| l.gold_label == Some(true)).count();
        assert_eq!(positives, 60);
        // 0.0125 * 100 = 1.25 rounds to 1; 0.025 * 100 = 2.5 rounds half up to 3.
        assert_eq!(small(100, 0.0125).positive_count(), 1);
        assert_eq!(small(100, 0.025).positive_count(), 3);
    }

    #[test]
    fn full_section_rate_gives_sections() {
        let cfg = SynthesisConfig {
            diagnosis_section_rate: 1.0,
            ..small(200, 0.05)
        };
        let corpus = generate_synthetic(&cfg, 3).unwrap();
        for letter in &corpus {
            let stripped = strip_boilerplate(&letter.text).to_lowercase();
            assert!(stripped.contains("diagnosi"), "{}", letter.text);
        }
    }

    #[test]
    fn pediatric_flags_follow_header() {
        let cfg = SynthesisConfig {
            pediatric_fraction: 0.0,
            ..small(100, 0.05)
        };
        assert!(generate_synthetic(&cfg, 1).unwrap().iter().all(|l| !l.is_pediatric()));
        let cfg = SynthesisConfig {
            pediatric_fraction: 1.0,
            ..small(100, 0.05)
        };
        assert!(generate_synthetic(&cfg, 1).unwrap().iter().all(|l| l.is_pediatric()));
    }

    #[test]
    fn rejects_invalid_configs() {
        assert!(generate_synthetic(&small(10, 0.05), 1).is_err());
        assert!(generate_synthetic(&small(100, 0.0), 1).is_err());
        let cfg = SynthesisConfig {
            target_disease: "unknown".into(),
            ..small(100, 0.05)
        };
        assert!(generate_synthetic(&cfg, 1).is_err());
        let cfg = SynthesisConfig {
            diagnosis_section_rate: 0.0,
            ..small(100, 0.05)
        };
        assert!(generate_synthetic(&cfg, 1).is_err());
    }

    #[test]
    fn template_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            let s = expand(&mut rng, "a{b|c|} d{e}");
            assert!(["ab de", "ac de", "a de"].contains(&s.as_str()), "{s}");
        }
        assert_eq!(expand(&mut rng, "no groups"), "no groups");
    }

    #[test]
    fn prevalence_within_one_letter() {
        for (n, p) in [(150, 0.1), (333, 0.07), (1000, 0.013)] {
            let corpus = generate_synthetic(&small(n, p), 11).unwrap();
            let pos = corpus.iter().filter(|l| l.gold_label == Some(true)).count() as f64;
            assert!((pos / n as f64 - p).abs() <= 1.0 / n as f64);
        }
    }
}
