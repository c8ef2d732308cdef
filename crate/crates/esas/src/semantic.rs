//! Deterministic text-to-vector front end (the NLPS role).
//!
//! Documents are segmented into sentences and reduced to conceptual-graph
//! style triples (verb lemma, role, argument) by a small fixed rule set:
//! subject-verb-object plus the prepositional roles to/into/onto -> dest,
//! by/with -> inst. The full grammar-driven machinery this approximates is
//! deliberately out of scope; the protocol only needs a deterministic
//! text -> triples function.
//!
//! Every distinct triple owns one vector dimension, managed by
//! [`Vocabulary`]: dimensions are append-only, the total dimension is
//! pinned by a capacity chosen at setup, and document frequencies drive
//! the TF-IDF weighting. IDF = ln(1 + N/df) is evaluated with an exact
//! rational series to 12 fractional digits, so vectors are reproducible
//! bit-for-bit across platforms.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::codec::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::knn::PlainVector;

/// One linearized conceptual-graph entity: (head, relation, tail).
///
/// The canonical form is lowercase and whitespace-trimmed; equality and
/// hashing are exact over the canonical 3-tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    head: String,
    relation: String,
    tail: String,
}

impl Triple {
    pub fn new(head: &str, relation: &str, tail: &str) -> Triple {
        Triple {
            head: head.trim().to_lowercase(),
            relation: relation.trim().to_lowercase(),
            tail: tail.trim().to_lowercase(),
        }
    }

    pub fn head(&self) -> &str {
        &self.head
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn tail(&self) -> &str {
        &self.tail
    }
}

impl std::fmt::Display for Triple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}, {}]", self.head, self.relation, self.tail)
    }
}

/// Per-document processing method.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtractionMode {
    /// Keep only the highest-scoring sentence (content-token count, ties
    /// broken by position); vectors built from it are binary.
    ThemeSentence,
    /// Keep every sentence; vectors built this way are TF-IDF weighted.
    AllSentences,
}

const ARTICLES: &[&str] = &["a", "an", "the"];
const BE_FORMS: &[&str] = &["is", "am", "are", "was", "were", "be", "been", "being"];
const MODALS: &[&str] = &[
    "will", "would", "shall", "should", "can", "could", "may", "might", "must", "do", "does",
    "did", "have", "has", "had",
];
const SKIP_PREPS: &[&str] = &[
    "of", "in", "at", "on", "from", "for", "about", "over", "under", "near", "between", "through",
    "during", "against", "without", "within", "along", "across", "behind", "beyond", "around",
    "among",
];
const FILLER: &[&str] = &[
    "and", "or", "but", "not", "no", "nor", "so", "very", "too", "also", "just", "then", "than",
    "that", "this", "these", "those", "there", "here", "when", "where", "which", "who", "whom",
    "whose", "what", "how", "why", "if", "because", "while", "as", "it", "its", "he", "she", "him",
    "her", "his", "they", "them", "their", "we", "us", "our", "you", "your", "i", "me", "my",
];

fn role_of_preposition(word: &str) -> Option<&'static str> {
    match word {
        "to" | "into" | "onto" => Some("dest"),
        "by" | "with" => Some("inst"),
        _ => None,
    }
}

fn is_skip_preposition(word: &str) -> bool {
    SKIP_PREPS.contains(&word)
}

fn is_content_token(word: &str) -> bool {
    !(ARTICLES.contains(&word)
        || BE_FORMS.contains(&word)
        || MODALS.contains(&word)
        || FILLER.contains(&word)
        || role_of_preposition(word).is_some()
        || is_skip_preposition(word))
}

/// Irregular verb forms (past and participle) mapped to their lemma.
fn irregular_lemma(word: &str) -> Option<&'static str> {
    Some(match word {
        "went" | "gone" => "go",
        "saw" | "seen" => "see",
        "took" | "taken" => "take",
        "made" => "make",
        "ran" => "run",
        "came" => "come",
        "got" | "gotten" => "get",
        "gave" | "given" => "give",
        "found" => "find",
        "said" => "say",
        "wrote" | "written" => "write",
        "met" => "meet",
        "felt" => "feel",
        "kept" => "keep",
        "left" => "leave",
        "paid" => "pay",
        "told" => "tell",
        "thought" => "think",
        "brought" => "bring",
        "bought" => "buy",
        "began" | "begun" => "begin",
        "flew" | "flown" => "fly",
        "drove" | "driven" => "drive",
        "ate" | "eaten" => "eat",
        "drank" | "drunk" => "drink",
        "knew" | "known" => "know",
        "grew" | "grown" => "grow",
        "threw" | "thrown" => "throw",
        "wore" | "worn" => "wear",
        "spoke" | "spoken" => "speak",
        "built" => "build",
        "sent" => "send",
        "sang" | "sung" => "sing",
        "sold" => "sell",
        "stood" => "stand",
        "sat" => "sit",
        "lost" => "lose",
        "won" => "win",
        "heard" => "hear",
        "held" => "hold",
        "led" => "lead",
        "fell" => "fall",
        "rose" | "risen" => "rise",
        _ => return None,
    })
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn vowel_groups(word: &str) -> usize {
    let bytes = word.as_bytes();
    let mut groups = 0;
    let mut in_group = false;
    for &b in bytes {
        if is_vowel(b) {
            if !in_group {
                groups += 1;
                in_group = true;
            }
        } else {
            in_group = false;
        }
    }
    groups
}

/// Repairs a stem after suffix stripping: undoubles trailing consonants
/// (except l/s/z) and restores a dropped final e on short stems.
fn repair_stem(stem: &str) -> String {
    let bytes = stem.as_bytes();
    let n = bytes.len();
    if n >= 2 && bytes[n - 1] == bytes[n - 2] && !matches!(bytes[n - 1], b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    if n >= 2 {
        let last = bytes[n - 1];
        let prev = bytes[n - 2];
        if !is_vowel(last)
            && !matches!(last, b'w' | b'x' | b'y')
            && is_vowel(prev)
            && vowel_groups(stem) == 1
        {
            return format!("{stem}e");
        }
    }
    stem.to_string()
}

fn lemma_from_ing(word: &str) -> String {
    if let Some(lemma) = irregular_lemma(word) {
        return lemma.to_string();
    }
    match word {
        "seeing" => return "see".into(),
        "being" => return "be".into(),
        "dying" => return "die".into(),
        "lying" => return "lie".into(),
        "tying" => return "tie".into(),
        "fleeing" => return "flee".into(),
        "agreeing" => return "agree".into(),
        _ => {}
    }
    match word.strip_suffix("ing") {
        Some(stem) if stem.len() >= 2 => repair_stem(stem),
        _ => word.to_string(),
    }
}

fn lemma_verb(word: &str) -> String {
    if let Some(lemma) = irregular_lemma(word) {
        return lemma.to_string();
    }
    if let Some(stem) = word.strip_suffix("ied") {
        if !stem.is_empty() {
            return format!("{stem}y");
        }
    }
    if let Some(stem) = word.strip_suffix("ed") {
        if stem.len() >= 2 {
            return repair_stem(stem);
        }
    }
    if let Some(stem) = word.strip_suffix("ies") {
        if !stem.is_empty() {
            return format!("{stem}y");
        }
    }
    for suffix in ["sses", "shes", "ches", "xes", "zes", "oes"] {
        if let Some(stem) = word.strip_suffix(suffix) {
            return format!("{stem}{}", &suffix[..suffix.len() - 2]);
        }
    }
    if word.len() > 3 && word.ends_with('s') && !word.ends_with("ss") {
        return word[..word.len() - 1].to_string();
    }
    word.to_string()
}

fn tokenize(sentence: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in sentence.chars() {
        if c.is_alphanumeric() || c == '\'' || c == '-' {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn split_sentences(text: &str) -> Vec<&str> {
    text.split(['.', '!', '?'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

struct VerbAnalysis {
    lemma: String,
    /// index of the first token after the verb
    rest_start: usize,
    /// index before which the subject is searched
    subject_end: usize,
    copula: bool,
}

fn find_verb(tokens: &[String]) -> Option<VerbAnalysis> {
    // auxiliary-driven detection first
    if let Some(aux_start) = tokens
        .iter()
        .position(|t| BE_FORMS.contains(&t.as_str()) || MODALS.contains(&t.as_str()))
    {
        let mut run_end = aux_start;
        while run_end < tokens.len()
            && (BE_FORMS.contains(&tokens[run_end].as_str())
                || MODALS.contains(&tokens[run_end].as_str()))
        {
            run_end += 1;
        }
        let has_modal = tokens[aux_start..run_end]
            .iter()
            .any(|t| MODALS.contains(&t.as_str()));
        if run_end < tokens.len() {
            let next = tokens[run_end].as_str();
            if next.len() > 4 && next.ends_with("ing") {
                return Some(VerbAnalysis {
                    lemma: lemma_from_ing(next),
                    rest_start: run_end + 1,
                    subject_end: aux_start,
                    copula: false,
                });
            }
            if has_modal {
                return Some(VerbAnalysis {
                    lemma: lemma_verb(next),
                    rest_start: run_end + 1,
                    subject_end: aux_start,
                    copula: false,
                });
            }
        }
        // pure copula ("amy is a doctor")
        return Some(VerbAnalysis {
            lemma: "be".into(),
            rest_start: run_end,
            subject_end: aux_start,
            copula: true,
        });
    }
    // morphology scan: first past/inflected form after the first token
    for (i, token) in tokens.iter().enumerate().skip(1) {
        let t = token.as_str();
        let inflected = irregular_lemma(t).is_some()
            || (t.len() > 3 && t.ends_with("ed"))
            || (t.len() > 3 && t.ends_with('s') && !t.ends_with("ss") && i + 1 < tokens.len());
        if inflected && is_content_token(t) {
            return Some(VerbAnalysis {
                lemma: lemma_verb(t),
                rest_start: i + 1,
                subject_end: i,
                copula: false,
            });
        }
    }
    // positional fallback: the token after the leading article run
    let content: Vec<usize> = (0..tokens.len())
        .filter(|&i| !ARTICLES.contains(&tokens[i].as_str()))
        .collect();
    if content.len() >= 2 {
        let verb_idx = content[1];
        return Some(VerbAnalysis {
            lemma: lemma_verb(&tokens[verb_idx]),
            rest_start: verb_idx + 1,
            subject_end: verb_idx,
            copula: false,
        });
    }
    None
}

fn phrase_head<'a>(phrase: &[&'a str]) -> Option<&'a str> {
    phrase
        .iter()
        .rev()
        .find(|t| !ARTICLES.contains(*t) && !FILLER.contains(*t))
        .copied()
}

fn triples_of_sentence(tokens: &[String]) -> Vec<Triple> {
    let verb = match find_verb(tokens) {
        Some(v) => v,
        None => return Vec::new(),
    };
    let mut out = Vec::new();

    let subject_tokens: Vec<&str> = tokens[..verb.subject_end]
        .iter()
        .map(String::as_str)
        .collect();
    if let Some(subject) = phrase_head(&subject_tokens) {
        out.push(Triple::new(&verb.lemma, "agent", subject));
    }

    let mut role: Option<&'static str> = Some(if verb.copula { "attr" } else { "obj" });
    let mut phrase: Vec<&str> = Vec::new();
    let flush = |role: Option<&'static str>, phrase: &mut Vec<&str>, out: &mut Vec<Triple>| {
        if let (Some(role), Some(head)) = (role, phrase_head(phrase)) {
            out.push(Triple::new(&verb.lemma, role, head));
        }
        phrase.clear();
    };
    for token in &tokens[verb.rest_start.min(tokens.len())..] {
        let t = token.as_str();
        if let Some(new_role) = role_of_preposition(t) {
            flush(role, &mut phrase, &mut out);
            role = Some(new_role);
        } else if is_skip_preposition(t) {
            flush(role, &mut phrase, &mut out);
            role = None;
        } else if BE_FORMS.contains(&t) || MODALS.contains(&t) {
            // stray auxiliaries never head a phrase
            continue;
        } else {
            phrase.push(t);
        }
    }
    flush(role, &mut phrase, &mut out);
    out
}

fn sentence_score(tokens: &[String]) -> usize {
    tokens.iter().filter(|t| is_content_token(t)).count()
}

/// Extracts triples from text under the chosen mode. Deterministic;
/// empty text yields an empty list.
pub fn extract_triples(text: &str, mode: ExtractionMode) -> Vec<Triple> {
    let sentences = split_sentences(text);
    if sentences.is_empty() {
        return Vec::new();
    }
    let tokenized: Vec<Vec<String>> = sentences.iter().map(|s| tokenize(s)).collect();
    match mode {
        ExtractionMode::AllSentences => tokenized
            .iter()
            .flat_map(|tokens| triples_of_sentence(tokens))
            .collect(),
        ExtractionMode::ThemeSentence => {
            let theme = tokenized
                .iter()
                .enumerate()
                // max_by_key keeps the last maximum; invert index for earliest
                .max_by_key(|(i, tokens)| (sentence_score(tokens), usize::MAX - i))
                .map(|(_, tokens)| tokens)
                .expect("at least one sentence");
            triples_of_sentence(theme)
        }
    }
}

/// Parses the one-triple-per-line TAB format.
pub fn parse_triples_file(text: &str) -> Result<Vec<Triple>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 || fields.iter().any(|f| f.trim().is_empty()) {
            return Err(Error::InvalidParameter(format!(
                "triple file line {}: expected head<TAB>relation<TAB>tail",
                lineno + 1
            )));
        }
        out.push(Triple::new(fields[0], fields[1], fields[2]));
    }
    Ok(out)
}

/// Append-only registry mapping triples to vector dimensions.
///
/// The total dimension is pinned at `capacity`; vectors produced against
/// this vocabulary always have that length, with unused trailing
/// dimensions at zero. The version counter increments whenever the used
/// dimension count grows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    capacity: usize,
    triples: Vec<Triple>,
    slots: HashMap<Triple, usize>,
    df: Vec<u64>,
    doc_count: u64,
    version: u64,
}

impl Vocabulary {
    pub fn new(capacity: usize) -> Vocabulary {
        Vocabulary {
            capacity,
            triples: Vec::new(),
            slots: HashMap::new(),
            df: Vec::new(),
            doc_count: 0,
            version: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn doc_count(&self) -> u64 {
        self.doc_count
    }

    pub fn used_dimensions(&self) -> usize {
        self.triples.len()
    }

    /// 0-based vector slot of a known triple.
    pub fn slot_of(&self, triple: &Triple) -> Option<usize> {
        self.slots.get(triple).copied()
    }

    pub fn document_frequency(&self, triple: &Triple) -> Option<u64> {
        self.slot_of(triple).map(|slot| self.df[slot])
    }

    /// Number of triples in the list not yet holding a dimension.
    pub fn unseen_count(&self, triples: &[Triple]) -> usize {
        let mut seen = std::collections::HashSet::new();
        triples
            .iter()
            .filter(|t| !self.slots.contains_key(*t) && seen.insert((*t).clone()))
            .count()
    }

    /// Registers one document's triples: unseen triples get fresh
    /// dimensions, document frequencies update over the distinct set, and
    /// the corpus document count grows by one.
    pub fn ingest_document(&mut self, triples: &[Triple]) -> Result<()> {
        let needed = self.triples.len() + self.unseen_count(triples);
        if needed > self.capacity {
            return Err(Error::CapacityExceeded {
                needed,
                capacity: self.capacity,
            });
        }
        let before = self.triples.len();
        let mut distinct = std::collections::HashSet::new();
        for triple in triples {
            let slot = *self.slots.entry(triple.clone()).or_insert_with(|| {
                self.triples.push(triple.clone());
                self.df.push(0);
                self.triples.len() - 1
            });
            if distinct.insert(slot) {
                self.df[slot] += 1;
            }
        }
        self.doc_count += 1;
        if self.triples.len() != before {
            self.version += 1;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.put_u64(self.capacity as u64);
        w.put_u64(self.version);
        w.put_u64(self.doc_count);
        w.put_u32(self.triples.len() as u32);
        for (triple, df) in self.triples.iter().zip(&self.df) {
            w.put_str(triple.head());
            w.put_str(triple.relation());
            w.put_str(triple.tail());
            w.put_u64(*df);
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Vocabulary> {
        let mut r = ByteReader::new(bytes);
        let capacity = r.get_u64()? as usize;
        let version = r.get_u64()?;
        let doc_count = r.get_u64()?;
        let count = r.get_u32()? as usize;
        let mut vocab = Vocabulary::new(capacity);
        vocab.version = version;
        vocab.doc_count = doc_count;
        for _ in 0..count {
            let head = r.get_str()?;
            let relation = r.get_str()?;
            let tail = r.get_str()?;
            let df = r.get_u64()?;
            let triple = Triple::new(&head, &relation, &tail);
            vocab.slots.insert(triple.clone(), vocab.triples.len());
            vocab.triples.push(triple);
            vocab.df.push(df);
        }
        r.finish()?;
        Ok(vocab)
    }
}

/// ln(x) for rational x > 0, exact-series evaluation with error < 1e-20.
///
/// x is reduced to t * 2^e with t in [1, 2); ln t and ln 2 use the
/// atanh series ln t = 2 * sum z^{2k+1}/(2k+1) with z = (t-1)/(t+1),
/// which converges geometrically at rate z^2 <= 1/9.
fn ln_rational(x: &BigRational) -> BigRational {
    assert!(x.is_positive(), "ln of non-positive value");
    let two = BigRational::from(BigInt::from(2));
    let one = BigRational::one();
    let mut t = x.clone();
    let mut exponent: i64 = 0;
    while t >= two {
        t /= &two;
        exponent += 1;
    }
    while t < one {
        t *= &two;
        exponent -= 1;
    }
    let ln_t = atanh_series(&t);
    if exponent == 0 {
        return ln_t;
    }
    let ln_2 = atanh_series(&two);
    ln_t + BigRational::from(BigInt::from(exponent)) * ln_2
}

fn atanh_series(t: &BigRational) -> BigRational {
    let one = BigRational::one();
    let z = (t - &one) / (t + &one);
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = BigRational::zero();
    // z <= 1/3: 24 terms leave a tail below 3^-49, far under 1e-20
    for k in 0..24u32 {
        sum += &term / BigRational::from(BigInt::from(2 * k + 1));
        term *= &z2;
    }
    sum * BigRational::from(BigInt::from(2))
}

const IDF_PRECISION_DIGITS: u32 = 12;

/// IDF(t) = ln(1 + N/df), rounded to 12 fractional decimal digits and
/// kept as an exact rational.
pub fn inverse_document_frequency(doc_count: u64, df: u64) -> BigRational {
    assert!(df > 0 && doc_count > 0);
    let ratio = BigRational::new(BigInt::from(doc_count + df), BigInt::from(df));
    let scale = BigRational::from(BigInt::from(10u64).pow(IDF_PRECISION_DIGITS));
    let scaled = ln_rational(&ratio) * &scale + BigRational::new(BigInt::from(1), BigInt::from(2));
    BigRational::new(scaled.floor().to_integer(), scale.to_integer())
}

/// Binary vector: entry = 1 iff the triple occurs. Every triple must
/// already hold a dimension.
pub fn vectorize_binary(triples: &[Triple], vocab: &Vocabulary) -> Result<PlainVector> {
    let mut v = PlainVector::zero(vocab.capacity(), vocab.version());
    for triple in triples {
        let slot = vocab
            .slot_of(triple)
            .ok_or_else(|| Error::UnknownTriple(triple.to_string()))?;
        v.entries[slot] = BigRational::one();
    }
    Ok(v)
}

/// TF-IDF vector: entry = (count/total) * ln(1 + N/df). An empty triple
/// list yields the zero vector.
pub fn vectorize_tfidf(triples: &[Triple], vocab: &Vocabulary) -> Result<PlainVector> {
    let mut v = PlainVector::zero(vocab.capacity(), vocab.version());
    if triples.is_empty() {
        return Ok(v);
    }
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for triple in triples {
        let slot = vocab
            .slot_of(triple)
            .ok_or_else(|| Error::UnknownTriple(triple.to_string()))?;
        *counts.entry(slot).or_insert(0) += 1;
    }
    let total = BigInt::from(triples.len() as u64);
    for (slot, count) in counts {
        let tf = BigRational::new(BigInt::from(count), total.clone());
        let idf = inverse_document_frequency(vocab.doc_count(), vocab.df[slot]);
        v.entries[slot] = tf * idf;
    }
    Ok(v)
}

/// Query vectorization: extraction over all sentences, then a binary
/// vector over the triples the vocabulary knows; unknown triples are
/// dropped silently.
pub fn query_to_vector(query: &str, vocab: &Vocabulary) -> PlainVector {
    let mut v = PlainVector::zero(vocab.capacity(), vocab.version());
    for triple in extract_triples(query, ExtractionMode::AllSentences) {
        if let Some(slot) = vocab.slot_of(&triple) {
            v.entries[slot] = BigRational::one();
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(head: &str, relation: &str, tail: &str) -> Triple {
        Triple::new(head, relation, tail)
    }

    #[test]
    fn the_reference_sentence_extracts_three_triples() {
        let triples = extract_triples(
            "Amy is going to London by train",
            ExtractionMode::AllSentences,
        );
        let expected = vec![
            t("go", "agent", "amy"),
            t("go", "dest", "london"),
            t("go", "inst", "train"),
        ];
        assert_eq!(triples, expected);
    }

    #[test]
    fn empty_text_yields_no_triples() {
        assert!(extract_triples("", ExtractionMode::AllSentences).is_empty());
        assert!(extract_triples("   \n  ", ExtractionMode::ThemeSentence).is_empty());
    }

    #[test]
    fn extraction_is_deterministic() {
        let text = "The doctor examined the patient with a stethoscope. She wrote a report.";
        let a = extract_triples(text, ExtractionMode::AllSentences);
        let b = extract_triples(text, ExtractionMode::AllSentences);
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }

    #[test]
    fn svo_with_object_and_instrument() {
        let triples = extract_triples(
            "The doctor examines the patient with a stethoscope",
            ExtractionMode::AllSentences,
        );
        assert_eq!(
            triples,
            vec![
                t("examine", "agent", "doctor"),
                t("examine", "obj", "patient"),
                t("examine", "inst", "stethoscope"),
            ]
        );
    }

    #[test]
    fn copula_produces_attribute_triples() {
        let triples = extract_triples("Amy is a doctor", ExtractionMode::AllSentences);
        assert_eq!(
            triples,
            vec![t("be", "agent", "amy"), t("be", "attr", "doctor")]
        );
    }

    #[test]
    fn theme_mode_keeps_the_highest_scoring_sentence() {
        // sentence 2 carries more content tokens
        let text = "Amy sleeps. The nurse took the sample to the laboratory by courier.";
        let theme = extract_triples(text, ExtractionMode::ThemeSentence);
        let all: Vec<Triple> = extract_triples(
            "The nurse took the sample to the laboratory by courier",
            ExtractionMode::AllSentences,
        );
        assert_eq!(theme, all);

        // tie: the earliest sentence wins
        let tied = "Amy visited London. Bob visited Paris.";
        let theme = extract_triples(tied, ExtractionMode::ThemeSentence);
        assert_eq!(
            theme,
            extract_triples("Amy visited London", ExtractionMode::AllSentences)
        );
    }

    #[test]
    fn lemmatization_rules() {
        assert_eq!(lemma_from_ing("going"), "go");
        assert_eq!(lemma_from_ing("running"), "run");
        assert_eq!(lemma_from_ing("making"), "make");
        assert_eq!(lemma_from_ing("falling"), "fall");
        assert_eq!(lemma_verb("went"), "go");
        assert_eq!(lemma_verb("examines"), "examine");
        assert_eq!(lemma_verb("visited"), "visit");
        assert_eq!(lemma_verb("studied"), "study");
        assert_eq!(lemma_verb("chases"), "chase");
        assert_eq!(lemma_verb("planned"), "plan");
    }

    #[test]
    fn triples_canonicalize_case_and_whitespace() {
        assert_eq!(t(" Go ", "Dest", " London"), t("go", "dest", "london"));
    }

    #[test]
    fn triple_file_parsing() {
        let text = "go\tdest\tlondon\n\ngo\tagent\tamy\n";
        let parsed = parse_triples_file(text).unwrap();
        assert_eq!(
            parsed,
            vec![t("go", "dest", "london"), t("go", "agent", "amy")]
        );
        assert!(parse_triples_file("only\ttwo").is_err());
        assert!(parse_triples_file("a\t\tb").is_err());
    }

    #[test]
    fn vocabulary_assigns_stable_dimensions() {
        let mut vocab = Vocabulary::new(16);
        let doc = vec![t("a", "obj", "b"), t("c", "obj", "d"), t("e", "obj", "f")];
        vocab.ingest_document(&doc).unwrap();
        assert_eq!(vocab.used_dimensions(), 3);
        assert_eq!(vocab.version(), 1);
        let slot = vocab.slot_of(&doc[0]).unwrap();

        // re-ingest: no new dimensions, df grows, version stays
        vocab.ingest_document(&doc).unwrap();
        assert_eq!(vocab.used_dimensions(), 3);
        assert_eq!(vocab.version(), 1);
        assert_eq!(vocab.document_frequency(&doc[0]), Some(2));

        // growth: new triple appended, old slots unchanged
        vocab
            .ingest_document(&[doc[0].clone(), t("x", "obj", "y")])
            .unwrap();
        assert_eq!(vocab.used_dimensions(), 4);
        assert_eq!(vocab.version(), 2);
        assert_eq!(vocab.slot_of(&doc[0]), Some(slot));
        assert_eq!(vocab.doc_count(), 3);
    }

    #[test]
    fn vocabulary_enforces_capacity() {
        let mut vocab = Vocabulary::new(2);
        vocab
            .ingest_document(&[t("a", "obj", "b"), t("c", "obj", "d")])
            .unwrap();
        let err = vocab.ingest_document(&[t("e", "obj", "f")]);
        assert!(matches!(
            err,
            Err(Error::CapacityExceeded {
                needed: 3,
                capacity: 2
            })
        ));
    }

    #[test]
    fn binary_vectorization() {
        let mut vocab = Vocabulary::new(4);
        let doc = vec![t("a", "obj", "b"), t("c", "obj", "d")];
        vocab.ingest_document(&doc).unwrap();

        let v = vectorize_binary(&[], &vocab).unwrap();
        assert!(v.entries.iter().all(|e| e.is_zero()));
        assert_eq!(v.dimension(), 4);

        // duplicates clamp to 1
        let v = vectorize_binary(&[doc[0].clone(), doc[0].clone()], &vocab).unwrap();
        assert_eq!(v.entries[0], BigRational::one());
        assert!(v.entries[1].is_zero());

        // triples covering every dimension give the all-ones vector
        let mut full = Vocabulary::new(2);
        full.ingest_document(&doc).unwrap();
        let v = vectorize_binary(&doc, &full).unwrap();
        assert!(v.entries.iter().all(|e| e == &BigRational::one()));

        assert!(matches!(
            vectorize_binary(&[t("nope", "obj", "nope")], &vocab),
            Err(Error::UnknownTriple(_))
        ));
    }

    #[test]
    fn idf_of_single_document_corpus_is_ln_two() {
        // ln 2 = 0.693147180559945..., rounded at the 12th fractional digit
        let idf = inverse_document_frequency(1, 1);
        let expected = BigRational::new(BigInt::from(693147180560u64), BigInt::from(10u64.pow(12)));
        assert_eq!(idf, expected);
    }

    #[test]
    fn idf_of_three_over_one_is_ln_three() {
        // ln 3 = 1.098612288668109...
        let idf = inverse_document_frequency(2, 1);
        let expected =
            BigRational::new(BigInt::from(1098612288668u64), BigInt::from(10u64.pow(12)));
        assert_eq!(idf, expected);
    }

    #[test]
    fn tfidf_vectorization() {
        let mut vocab = Vocabulary::new(4);
        let doc = vec![t("a", "obj", "b")];
        vocab.ingest_document(&doc).unwrap();

        // one triple occurring once in a one-document corpus: TF = 1, IDF = ln 2
        let v = vectorize_tfidf(&doc, &vocab).unwrap();
        assert_eq!(v.entries[0], inverse_document_frequency(1, 1));
        assert!(v.entries[1].is_zero());

        // uniform document: each of k triples once, TF = 1/k each
        let mut vocab = Vocabulary::new(4);
        let doc = vec![t("a", "obj", "b"), t("c", "obj", "d"), t("e", "obj", "f")];
        vocab.ingest_document(&doc).unwrap();
        let v = vectorize_tfidf(&doc, &vocab).unwrap();
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        for slot in 0..3 {
            assert_eq!(v.entries[slot], &third * inverse_document_frequency(1, 1));
        }

        // TF entries of a non-empty document sum to 1 before IDF weighting:
        // duplicate triple counted twice
        let doc2 = vec![
            doc[0].clone(),
            doc[0].clone(),
            doc[1].clone(),
            doc[2].clone(),
        ];
        vocab.ingest_document(&doc2).unwrap();
        let v = vectorize_tfidf(&doc2, &vocab).unwrap();
        // slot 0: TF 2/4, slots 1-2: TF 1/4 each; IDF(slot0) = ln(1 + 2/2)
        assert_eq!(
            v.entries[0],
            BigRational::new(BigInt::from(1), BigInt::from(2)) * inverse_document_frequency(2, 2)
        );

        // empty document: zero vector, no error
        let v = vectorize_tfidf(&[], &vocab).unwrap();
        assert!(v.entries.iter().all(|e| e.is_zero()));
    }

    #[test]
    fn query_vectorization_drops_unknown_triples() {
        let mut vocab = Vocabulary::new(8);
        let doc = extract_triples(
            "Amy is going to London by train",
            ExtractionMode::AllSentences,
        );
        vocab.ingest_document(&doc).unwrap();

        // repeating an indexed sentence lights exactly its dimensions
        let q = query_to_vector("Amy is going to London by train", &vocab);
        let ones: Vec<usize> = q
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_zero())
            .map(|(i, _)| i)
            .collect();
        assert_eq!(ones, vec![0, 1, 2]);

        // unknown content: zero vector
        let q = query_to_vector("Bob bought a boat", &vocab);
        assert!(q.entries.iter().all(|e| e.is_zero()));

        // empty query: zero vector
        let q = query_to_vector("", &vocab);
        assert!(q.entries.iter().all(|e| e.is_zero()));
    }

    #[test]
    fn vocabulary_serialization_round_trips() {
        let mut vocab = Vocabulary::new(8);
        vocab
            .ingest_document(&[t("a", "obj", "b"), t("c", "dest", "d")])
            .unwrap();
        vocab.ingest_document(&[t("a", "obj", "b")]).unwrap();
        let back = Vocabulary::from_bytes(&vocab.to_bytes()).unwrap();
        assert_eq!(back, vocab);
    }
}
