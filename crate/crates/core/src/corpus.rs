//! Document model, corpus ingestion, cleaning and synthetic corpus generation.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, BufReader, Read};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{self, LabelSetup};
use crate::textnorm::normalize;

pub const MIN_YEAR: i32 = 1790;
pub const MAX_YEAR: i32 = 2100;

/// One court ruling with its metadata labels and case description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law_area: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision_year: Option<i32>,
    #[serde(rename = "ruling", default, skip_serializing_if = "Option::is_none")]
    pub ruling_raw: Option<String>,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub cited_laws: Vec<String>,
}

impl Document {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        if let Some(y) = self.decision_year {
            if !(MIN_YEAR..=MAX_YEAR).contains(&y) {
                return Err(format!("decision_year {y} outside [{MIN_YEAR}, {MAX_YEAR}]"));
            }
        }
        Ok(())
    }

    fn has_field(&self, field: Field) -> bool {
        match field {
            Field::LawArea => self.law_area.as_deref().is_some_and(|s| !s.trim().is_empty()),
            Field::DecisionYear => self.decision_year.is_some(),
            Field::RulingRaw => self.ruling_raw.as_deref().is_some_and(|s| !s.trim().is_empty()),
            Field::Description => !self.description.trim().is_empty(),
        }
    }
}

/// Document fields that can be required for completeness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    LawArea,
    DecisionYear,
    RulingRaw,
    Description,
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "law_area" => Ok(Field::LawArea),
            "decision_year" => Ok(Field::DecisionYear),
            "ruling" | "ruling_raw" => Ok(Field::RulingRaw),
            "description" => Ok(Field::Description),
            other => Err(Error::config(format!("unknown document field {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Xml,
}

impl CorpusFormat {
    /// Guesses the format from a file extension, defaulting to JSONL.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("xml") => CorpusFormat::Xml,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "xml" => Ok(CorpusFormat::Xml),
            other => Err(Error::config(format!("unknown corpus format {other:?}"))),
        }
    }
}

/// Outcome of [`dedupe_and_filter`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_docs: usize,
    pub duplicates_removed: usize,
    pub incomplete_removed: usize,
    pub label_histograms: BTreeMap<String, BTreeMap<String, usize>>,
}

/// Parses a corpus stream. Record ordinals in errors are 1-based.
pub fn parse_corpus<R: Read>(source: R, format: CorpusFormat) -> Result<Vec<Document>> {
    let docs = match format {
        CorpusFormat::Jsonl => parse_jsonl(source)?,
        CorpusFormat::Xml => parse_xml(source)?,
    };
    let mut seen = HashSet::new();
    for (i, doc) in docs.iter().enumerate() {
        doc.validate().map_err(|reason| Error::MalformedRecord { ordinal: i + 1, reason })?;
        if !seen.insert(doc.id.as_str()) {
            return Err(Error::MalformedRecord { ordinal: i + 1, reason: format!("duplicate id {:?}", doc.id) });
        }
    }
    Ok(docs)
}

fn parse_jsonl<R: Read>(source: R) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line)
            .map_err(|e| Error::MalformedRecord { ordinal: i + 1, reason: e.to_string() })?;
        docs.push(doc);
    }
    Ok(docs)
}

fn parse_xml<R: Read>(mut source: R) -> Result<Vec<Document>> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let tree =
        roxmltree::Document::parse(&text).map_err(|e| Error::MalformedRecord { ordinal: 0, reason: e.to_string() })?;
    let root = tree.root_element();
    if root.tag_name().name() != "corpus" {
        return Err(Error::MalformedRecord {
            ordinal: 0,
            reason: format!("root element is <{}>, expected <corpus>", root.tag_name().name()),
        });
    }
    let mut docs = Vec::new();
    for (i, node) in root.children().filter(|n| n.is_element()).enumerate() {
        let ordinal = i + 1;
        let bad = |reason: String| Error::MalformedRecord { ordinal, reason };
        if node.tag_name().name() != "doc" {
            return Err(bad(format!("unexpected element <{}>", node.tag_name().name())));
        }
        let mut doc = Document {
            id: String::new(),
            law_area: None,
            decision_year: None,
            ruling_raw: None,
            description: String::new(),
            cited_laws: Vec::new(),
        };
        let mut has_id = false;
        for field in node.children().filter(|n| n.is_element()) {
            let value: String = field.children().filter(|c| c.is_text()).filter_map(|c| c.text()).collect();
            match field.tag_name().name() {
                "id" => {
                    doc.id = value.trim().to_owned();
                    has_id = true;
                }
                "law_area" => doc.law_area = Some(value),
                "decision_year" => {
                    let year =
                        value.trim().parse().map_err(|_| bad(format!("decision_year {value:?} is not an integer")))?;
                    doc.decision_year = Some(year);
                }
                "ruling" => doc.ruling_raw = Some(value),
                "description" => doc.description = value,
                "cited_laws" => doc.cited_laws.push(value),
                other => return Err(bad(format!("unknown field <{other}>"))),
            }
        }
        if !has_id {
            return Err(bad("missing <id>".into()));
        }
        docs.push(doc);
    }
    Ok(docs)
}

/// Writes documents as JSONL.
pub fn write_jsonl<W: std::io::Write>(mut out: W, docs: &[Document]) -> Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Drops incomplete documents, then keeps the first document of each group
/// sharing a normalized description.
pub fn dedupe_and_filter(docs: Vec<Document>, required_fields: &BTreeSet<Field>) -> (Vec<Document>, CorpusStats) {
    let input = docs.len();
    let mut stats = CorpusStats::default();
    let mut seen = HashSet::new();
    let mut kept = Vec::with_capacity(docs.len());
    for doc in docs {
        if !required_fields.iter().all(|&f| doc.has_field(f)) {
            stats.incomplete_removed += 1;
            continue;
        }
        if !seen.insert(normalize(&doc.description)) {
            stats.duplicates_removed += 1;
            continue;
        }
        kept.push(doc);
    }
    stats.total_docs = kept.len();
    debug_assert_eq!(stats.total_docs, input - stats.duplicates_removed - stats.incomplete_removed);
    stats.label_histograms = label_histograms(&kept);
    (kept, stats)
}

fn label_histograms(docs: &[Document]) -> BTreeMap<String, BTreeMap<String, usize>> {
    let mut hist: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut bump = |task: &str, label: String| {
        *hist.entry(task.to_owned()).or_default().entry(label).or_default() += 1;
    };
    for doc in docs {
        if let Some(area) = doc.law_area.as_deref() {
            let label = normalize(area);
            if !label.is_empty() {
                bump("law_area", label);
            }
        }
        if let Some(ruling) = doc.ruling_raw.as_deref() {
            if let Ok(first) = labels::extract_label(ruling, LabelSetup::FirstWord) {
                bump("ruling_first_word", first);
            }
            if let Ok(full) = labels::extract_label(ruling, LabelSetup::MultiWord) {
                bump("ruling_multi_word", full);
            }
        }
        if let Some(year) = doc.decision_year {
            bump("decade", format!("{}s", year.div_euclid(10) * 10));
        }
    }
    hist
}

/// Which document field carries the synthetic class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthTarget {
    LawArea,
    #[default]
    Ruling,
    /// Class labels are decade start years such as "1970".
    Decade,
}

/// Parameters for [`generate_synthetic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub target: SynthTarget,
    pub classes: Vec<String>,
    pub docs_per_class: usize,
    pub shared_vocab_size: usize,
    pub class_vocab_size: usize,
    /// Inclusive range of tokens drawn per description.
    pub doc_len: (usize, usize),
    /// Probability that a drawn token comes from the class vocabulary.
    pub signal_ratio: f64,
    /// Inject the label's own words into each description.
    pub leak: bool,
    /// Extra surface forms injected alongside a leaked label word.
    pub leak_variants: BTreeMap<String, Vec<String>>,
    /// Class `i` of `K` draws shared tokens from the first `(i+1)/K` of the
    /// shared vocabulary, giving classes distinct type-token ratios.
    pub richness_regimes: bool,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            target: SynthTarget::Ruling,
            classes: vec!["cassation".into(), "rejet".into()],
            docs_per_class: 50,
            shared_vocab_size: 500,
            class_vocab_size: 50,
            doc_len: (40, 120),
            signal_ratio: 0.3,
            leak: false,
            leak_variants: BTreeMap::new(),
            richness_regimes: false,
        }
    }
}

impl SynthSpec {
    /// `n` generic classes named `classe a`, `classe b`, ... for `target`.
    pub fn with_classes(target: SynthTarget, n: usize) -> Self {
        let classes = match target {
            SynthTarget::Decade => (0..n).map(|i| (1960 + 10 * i as i32).to_string()).collect(),
            SynthTarget::LawArea => (0..n).map(|i| format!("CHAMBRE_{}", alpha(i))).collect(),
            SynthTarget::Ruling => (0..n).map(|i| format!("decision{}", alpha(i))).collect(),
        };
        SynthSpec { target, classes, ..SynthSpec::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.classes.len() < 2 {
            return Err(Error::config("synthetic corpus needs at least 2 classes"));
        }
        let distinct: BTreeSet<_> = self.classes.iter().collect();
        if distinct.len() != self.classes.len() {
            return Err(Error::config("synthetic class labels must be distinct"));
        }
        if self.docs_per_class == 0 || self.shared_vocab_size == 0 || self.class_vocab_size == 0 {
            return Err(Error::config("docs_per_class, shared_vocab_size and class_vocab_size must be at least 1"));
        }
        if self.doc_len.0 == 0 || self.doc_len.0 > self.doc_len.1 {
            return Err(Error::config("doc_len must be a non-empty range starting at 1 or more"));
        }
        if !(0.0..=1.0).contains(&self.signal_ratio) {
            return Err(Error::config("signal_ratio must lie in [0, 1]"));
        }
        if self.target == SynthTarget::Decade {
            for c in &self.classes {
                let year: i32 = c.parse().map_err(|_| Error::config(format!("decade class {c:?} is not a year")))?;
                if !(MIN_YEAR..=MAX_YEAR - 9).contains(&year) {
                    return Err(Error::config(format!("decade class {year} out of range")));
                }
            }
        }
        Ok(())
    }
}

/// Base-26 lowercase encoding, bijective so distinct indices give distinct
/// strings.
fn alpha(mut i: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'a' + (i % 26) as u8);
        i /= 26;
        if i == 0 {
            break;
        }
        i -= 1;
    }
    s.reverse();
    String::from_utf8(s).expect("ascii")
}

fn shared_word(j: usize) -> String {
    format!("zq{}", alpha(j))
}

fn class_word(class: usize, j: usize) -> String {
    format!("zk{}{}{}", alpha(class / 26 % 26), alpha(class % 26), alpha(j))
}

const FILLER_AREAS: [&str; 3] = ["CHAMBRE_SOCIALE", "CHAMBRE_CIVILE_1", "CHAMBRE_CRIMINELLE"];
const FILLER_RULINGS: [&str; 3] = ["rejet", "cassation", "cassation partielle"];

/// Generates a labelled corpus with planted class signal, deterministic per
/// `(spec, seed)`.
pub fn generate_synthetic(spec: &SynthSpec, seed: u64) -> Result<Vec<Document>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = spec.classes.len();
    let mut docs = Vec::with_capacity(k * spec.docs_per_class);
    for _ in 0..spec.docs_per_class {
        for (c, label) in spec.classes.iter().enumerate() {
            let shared_pool = if spec.richness_regimes {
                (spec.shared_vocab_size * (c + 1) / k).max(1)
            } else {
                spec.shared_vocab_size
            };
            let len = rng.gen_range(spec.doc_len.0..=spec.doc_len.1);
            let mut words: Vec<String> = (0..len)
                .map(|_| {
                    if rng.gen_bool(spec.signal_ratio) {
                        class_word(c, rng.gen_range(0..spec.class_vocab_size))
                    } else {
                        shared_word(rng.gen_range(0..shared_pool))
                    }
                })
                .collect();
            if spec.leak {
                let label_words: Vec<String> =
                    normalize(label).split(' ').filter(|w| !w.is_empty()).map(String::from).collect();
                for w in &label_words {
                    let mut forms = vec![w.clone()];
                    forms.extend(spec.leak_variants.get(w).into_iter().flatten().cloned());
                    for form in forms {
                        let at = rng.gen_range(0..=words.len());
                        words.insert(at, form);
                    }
                }
            }
            let mut doc = Document {
                id: format!("synth-{:06}", docs.len()),
                law_area: Some(FILLER_AREAS.choose(&mut rng).expect("nonempty").to_string()),
                decision_year: Some(rng.gen_range(1960..2020)),
                ruling_raw: Some(FILLER_RULINGS.choose(&mut rng).expect("nonempty").to_string()),
                description: words.join(" "),
                cited_laws: Vec::new(),
            };
            match spec.target {
                SynthTarget::LawArea => doc.law_area = Some(label.clone()),
                SynthTarget::Ruling => doc.ruling_raw = Some(label.clone()),
                SynthTarget::Decade => {
                    let start: i32 = label.parse().expect("validated");
                    doc.decision_year = Some(start + rng.gen_range(0..10));
                }
            }
            docs.push(doc);
        }
    }
    Ok(docs)
}
