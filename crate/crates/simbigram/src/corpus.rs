//! Vocabulary construction and sparse bigram counting.
//!
//! Sentences are independent: bigrams never span a sentence boundary and no
//! begin/end pseudo-tokens are introduced, so the total bigram count `N` is
//! exactly the number of adjacent within-sentence token pairs.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use thiserror::Error;

/// Dense integer word id. Id 0 is always the unknown-word sentinel.
pub type WordId = u32;

/// Surface form reserved for out-of-vocabulary tokens.
pub const UNK: &str = "<unk>";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("empty corpus: no tokens to count")]
    EmptyCorpus,
    #[error("invalid byte sequence at offset {offset}: input is not valid UTF-8")]
    InvalidBytes { offset: usize },
    #[error("word {0:?} contains whitespace and cannot appear in a counts file")]
    WordWithWhitespace(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("counts validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Bidirectional word/id map with a reserved unknown-word sentinel at id 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    ids: HashMap<String, WordId>,
}

impl Vocabulary {
    /// Creates a vocabulary containing only the unknown sentinel.
    pub fn new() -> Self {
        let mut v = Vocabulary {
            words: Vec::new(),
            ids: HashMap::new(),
        };
        v.intern(UNK);
        v
    }

    /// Adds `word` if absent and returns its id.
    pub fn intern(&mut self, word: &str) -> WordId {
        if let Some(&id) = self.ids.get(word) {
            return id;
        }
        let id = self.words.len() as WordId;
        self.words.push(word.to_owned());
        self.ids.insert(word.to_owned(), id);
        id
    }

    /// Id of `word`, or the unk id when the word is out of vocabulary.
    pub fn id_or_unk(&self, word: &str) -> WordId {
        self.ids.get(word).copied().unwrap_or(self.unk_id())
    }

    /// Id of `word`, or `None` when absent.
    pub fn id(&self, word: &str) -> Option<WordId> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id as usize]
    }

    pub fn unk_id(&self) -> WordId {
        0
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// All ids, `0..len`.
    pub fn ids_iter(&self) -> impl Iterator<Item = WordId> {
        0..self.len() as WordId
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::new()
    }
}

/// Unigram counts, sparse bigram counts, and the total bigram count `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    unigram: Vec<u64>,
    bigram: HashMap<(WordId, WordId), u64>,
    total_bigrams: u64,
}

impl CountTable {
    pub fn new(vocab_size: usize) -> Self {
        CountTable {
            unigram: vec![0; vocab_size],
            bigram: HashMap::new(),
            total_bigrams: 0,
        }
    }

    /// Unigram count c(w).
    pub fn unigram(&self, w: WordId) -> u64 {
        self.unigram.get(w as usize).copied().unwrap_or(0)
    }

    /// Bigram count c(w1, w2); zero for unstored pairs.
    pub fn bigram(&self, w1: WordId, w2: WordId) -> u64 {
        self.bigram.get(&(w1, w2)).copied().unwrap_or(0)
    }

    /// Total number of bigram tokens, N.
    pub fn total_bigrams(&self) -> u64 {
        self.total_bigrams
    }

    /// Total number of word tokens (sum of unigram counts).
    pub fn total_tokens(&self) -> u64 {
        self.unigram.iter().sum()
    }

    pub fn vocab_size(&self) -> usize {
        self.unigram.len()
    }

    pub fn add_unigram(&mut self, w: WordId, count: u64) {
        self.unigram[w as usize] += count;
    }

    pub fn add_bigram(&mut self, w1: WordId, w2: WordId, count: u64) {
        if count == 0 {
            return;
        }
        *self.bigram.entry((w1, w2)).or_insert(0) += count;
        self.total_bigrams += count;
    }

    /// Removes a bigram type entirely, keeping unigram counts and adjusting N.
    pub fn remove_bigram_type(&mut self, w1: WordId, w2: WordId) -> u64 {
        match self.bigram.remove(&(w1, w2)) {
            Some(c) => {
                self.total_bigrams -= c;
                c
            }
            None => 0,
        }
    }

    /// Iterates over stored (w1, w2, count) entries in unspecified order.
    pub fn bigrams(&self) -> impl Iterator<Item = (WordId, WordId, u64)> + '_ {
        self.bigram.iter().map(|(&(a, b), &c)| (a, b, c))
    }

    /// Stored successors of `w1` with their counts.
    pub fn successors(&self, w1: WordId) -> Vec<(WordId, u64)> {
        let mut out: Vec<(WordId, u64)> = self
            .bigram
            .iter()
            .filter(|(&(a, _), _)| a == w1)
            .map(|(&(_, b), &c)| (b, c))
            .collect();
        out.sort_unstable();
        out
    }

    /// Checks the structural invariants; returns the first violation found.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let sum: u64 = self.bigram.values().sum();
        if sum != self.total_bigrams {
            return Err(CorpusError::Validation(format!(
                "bigram counts sum to {} but N is {}",
                sum, self.total_bigrams
            )));
        }
        if self.bigram.values().any(|&c| c == 0) {
            return Err(CorpusError::Validation(
                "zero-count bigram entry stored".into(),
            ));
        }
        let mut row = vec![0u64; self.unigram.len()];
        for (&(w1, _), &c) in &self.bigram {
            if w1 as usize >= self.unigram.len() {
                return Err(CorpusError::Validation(format!(
                    "bigram references word id {} outside vocabulary",
                    w1
                )));
            }
            row[w1 as usize] += c;
        }
        for (w1, &r) in row.iter().enumerate() {
            if r > self.unigram[w1] {
                return Err(CorpusError::Validation(format!(
                    "successor counts of word {} exceed its unigram count ({} > {})",
                    w1, r, self.unigram[w1]
                )));
            }
        }
        Ok(())
    }
}

/// Builds a closed vocabulary and count table from sentence-delimited token
/// strings. Each element of `sentences` is one sentence; tokens are taken
/// verbatim (whitespace-split upstream). Words occurring fewer than
/// `min_word_count` times map to the unk sentinel.
pub fn build_counts(
    sentences: &[Vec<String>],
    min_word_count: u64,
) -> Result<(Vocabulary, CountTable), CorpusError> {
    if sentences.iter().all(|s| s.is_empty()) {
        return Err(CorpusError::EmptyCorpus);
    }
    assert!(min_word_count >= 1, "min_word_count must be at least 1");

    // First pass: raw frequencies to decide vocabulary membership.
    let mut raw: HashMap<&str, u64> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();
    for sent in sentences {
        for tok in sent {
            let e = raw.entry(tok.as_str()).or_insert(0);
            if *e == 0 {
                order.push(tok.as_str());
            }
            *e += 1;
        }
    }

    let mut vocab = Vocabulary::new();
    for w in &order {
        if raw[w] >= min_word_count {
            vocab.intern(w);
        }
    }

    let mut table = CountTable::new(vocab.len());
    for sent in sentences {
        let ids: Vec<WordId> = sent.iter().map(|t| vocab.id_or_unk(t)).collect();
        for &id in &ids {
            table.add_unigram(id, 1);
        }
        for pair in ids.windows(2) {
            table.add_bigram(pair[0], pair[1], 1);
        }
    }
    Ok((vocab, table))
}

/// Splits raw text into sentences (one per line) of whitespace tokens,
/// checking UTF-8 validity and reporting the byte offset on failure.
pub fn tokenize_bytes(bytes: &[u8]) -> Result<Vec<Vec<String>>, CorpusError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CorpusError::InvalidBytes {
        offset: e.valid_up_to(),
    })?;
    Ok(tokenize(text))
}

/// One sentence per line, whitespace-split, tokens verbatim.
pub fn tokenize(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split_whitespace().map(str::to_owned).collect())
        .filter(|s: &Vec<String>| !s.is_empty())
        .collect()
}

/// Writes the counts file format: `N <total>` header, `U <word> <count>`
/// unigram lines, `B <w1> <w2> <count>` bigram lines.
pub fn write_counts<W: Write>(
    out: &mut W,
    table: &CountTable,
    vocab: &Vocabulary,
) -> Result<(), CorpusError> {
    for w in vocab.words() {
        if w.chars().any(char::is_whitespace) {
            return Err(CorpusError::WordWithWhitespace(w.clone()));
        }
    }
    let mut buf = String::new();
    writeln!(buf, "N {}", table.total_bigrams()).unwrap();
    for id in vocab.ids_iter() {
        writeln!(buf, "U {} {}", vocab.word(id), table.unigram(id)).unwrap();
    }
    let mut bigrams: Vec<(WordId, WordId, u64)> = table.bigrams().collect();
    bigrams.sort_unstable();
    for (w1, w2, c) in bigrams {
        writeln!(buf, "B {} {} {}", vocab.word(w1), vocab.word(w2), c).unwrap();
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

/// Reads a counts file back into a (Vocabulary, CountTable) pair, validating
/// the header total and the table invariants.
pub fn read_counts<R: BufRead>(input: R) -> Result<(Vocabulary, CountTable), CorpusError> {
    let mut vocab = Vocabulary::new();
    let mut header_n: Option<u64> = None;
    let mut unigrams: Vec<(String, u64)> = Vec::new();
    let mut bigrams: Vec<(String, String, u64)> = Vec::new();

    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(' ').collect();
        let parse_count = |s: &str| -> Result<u64, CorpusError> {
            s.parse::<u64>().map_err(|_| CorpusError::Parse {
                line: lineno,
                msg: format!("invalid count {:?}", s),
            })
        };
        match parts.as_slice() {
            ["N", n] => {
                if header_n.is_some() {
                    return Err(CorpusError::Parse {
                        line: lineno,
                        msg: "duplicate N header".into(),
                    });
                }
                header_n = Some(parse_count(n)?);
            }
            ["U", word, count] => unigrams.push((word.to_string(), parse_count(count)?)),
            ["B", w1, w2, count] => {
                bigrams.push((w1.to_string(), w2.to_string(), parse_count(count)?))
            }
            _ => {
                return Err(CorpusError::Parse {
                    line: lineno,
                    msg: format!("unrecognized line {:?}", line),
                })
            }
        }
    }

    let header_n = header_n.ok_or(CorpusError::Parse {
        line: 0,
        msg: "missing N header".into(),
    })?;

    for (word, _) in &unigrams {
        vocab.intern(word);
    }
    let mut table = CountTable::new(vocab.len());
    for (word, count) in &unigrams {
        let id = vocab.id(word).unwrap();
        table.add_unigram(id, *count);
    }
    for (w1, w2, count) in &bigrams {
        let a = vocab.id(w1).ok_or_else(|| {
            CorpusError::Validation(format!("bigram references unknown word {:?}", w1))
        })?;
        let b = vocab.id(w2).ok_or_else(|| {
            CorpusError::Validation(format!("bigram references unknown word {:?}", w2))
        })?;
        if *count == 0 {
            return Err(CorpusError::Validation(format!(
                "zero-count bigram line for ({}, {})",
                w1, w2
            )));
        }
        table.add_bigram(a, b, *count);
    }
    if table.total_bigrams() != header_n {
        return Err(CorpusError::Validation(format!(
            "N header says {} but bigram lines sum to {}",
            header_n,
            table.total_bigrams()
        )));
    }
    table.validate()?;
    Ok((vocab, table))
}
