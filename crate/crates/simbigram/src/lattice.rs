//! Word-lattice rescoring and model-disagreement analysis.
//!
//! A lattice is a DAG of word arcs carrying acoustic scores (negative log
//! likelihoods). Decoding minimizes the sum of acoustic score plus
//! `lm_weight` times the negative natural-log language-model probability of
//! each arc word given the previous arc's word; the first arc is scored with
//! the unigram probability since the lattice carries no history.

use std::collections::HashMap;
use std::io::BufRead;

use thiserror::Error;

use crate::backoff::Estimator;
use crate::corpus::{Vocabulary, WordId};
use crate::eval::BigramScorer;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("lattice is not a DAG: cycle involving node {0}")]
    NotADag(usize),
    #[error("node {0} does not lie on any start-to-end path")]
    UnreachableNode(usize),
    #[error("missing reference transcript")]
    MissingReference,
    #[error("language model error: {0}")]
    Model(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub word: WordId,
    pub acoustic_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub node_count: usize,
    pub start: usize,
    pub end: usize,
    pub arcs: Vec<Arc>,
    /// Reference transcript, when the file carried a REF line.
    pub reference: Option<Vec<WordId>>,
}

impl Lattice {
    /// Out-arcs grouped by source node.
    fn out_arcs(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.node_count];
        for (i, a) in self.arcs.iter().enumerate() {
            out[a.from].push(i);
        }
        out
    }

    /// Structural validation: DAG plus every node on some start-to-end path.
    pub fn validate(&self) -> Result<(), LatticeError> {
        let out = self.out_arcs();
        // cycle detection by iterative DFS coloring
        let mut color = vec![0u8; self.node_count]; // 0 white, 1 gray, 2 black
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for root in 0..self.node_count {
            if color[root] != 0 {
                continue;
            }
            color[root] = 1;
            stack.push((root, 0));
            while let Some(frame) = stack.last_mut() {
                let node = frame.0;
                if frame.1 < out[node].len() {
                    let arc = &self.arcs[out[node][frame.1]];
                    frame.1 += 1;
                    match color[arc.to] {
                        0 => {
                            color[arc.to] = 1;
                            stack.push((arc.to, 0));
                        }
                        1 => return Err(LatticeError::NotADag(arc.to)),
                        _ => {}
                    }
                } else {
                    color[node] = 2;
                    stack.pop();
                }
            }
        }
        // forward reachability from start
        let mut fwd = vec![false; self.node_count];
        let mut queue = vec![self.start];
        fwd[self.start] = true;
        while let Some(n) = queue.pop() {
            for &ai in &out[n] {
                let to = self.arcs[ai].to;
                if !fwd[to] {
                    fwd[to] = true;
                    queue.push(to);
                }
            }
        }
        // backward reachability from end
        let mut inc = vec![Vec::new(); self.node_count];
        for (i, a) in self.arcs.iter().enumerate() {
            inc[a.to].push(i);
        }
        let mut bwd = vec![false; self.node_count];
        let mut queue = vec![self.end];
        bwd[self.end] = true;
        while let Some(n) = queue.pop() {
            for &ai in &inc[n] {
                let from = self.arcs[ai].from;
                if !bwd[from] {
                    bwd[from] = true;
                    queue.push(from);
                }
            }
        }
        for n in 0..self.node_count {
            if !(fwd[n] && bwd[n]) {
                return Err(LatticeError::UnreachableNode(n));
            }
        }
        Ok(())
    }

    /// Enumerates every start-to-end word sequence with its arc index list.
    /// Intended for small lattices (tests and oracles).
    pub fn all_paths(&self) -> Vec<Vec<usize>> {
        let out = self.out_arcs();
        let mut paths = Vec::new();
        let mut current = Vec::new();
        fn rec(
            lat: &Lattice,
            out: &[Vec<usize>],
            node: usize,
            current: &mut Vec<usize>,
            paths: &mut Vec<Vec<usize>>,
        ) {
            if node == lat.end {
                paths.push(current.clone());
                return;
            }
            for &ai in &out[node] {
                current.push(ai);
                rec(lat, out, lat.arcs[ai].to, current, paths);
                current.pop();
            }
        }
        rec(self, &out, self.start, &mut current, &mut paths);
        paths
    }
}

/// Parses the lattice text format, mapping unknown words to unk. Returns the
/// validated lattice plus any unknown words encountered.
pub fn parse_lattice<R: BufRead>(
    input: R,
    vocab: &Vocabulary,
) -> Result<(Lattice, Vec<String>), LatticeError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut arcs = Vec::new();
    let mut reference = None;
    let mut unknown_words = Vec::new();

    let lookup = |w: &str, unknown: &mut Vec<String>| -> WordId {
        match vocab.id(w) {
            Some(id) => id,
            None => {
                unknown.push(w.to_string());
                vocab.unk_id()
            }
        }
    };

    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["LATTICE", n, s, e] => {
                let parse = |v: &str| -> Result<usize, LatticeError> {
                    v.parse().map_err(|_| LatticeError::Parse {
                        line: lineno,
                        msg: format!("invalid node number {:?}", v),
                    })
                };
                header = Some((parse(n)?, parse(s)?, parse(e)?));
            }
            ["A", from, to, word, score] => {
                let parse_node = |v: &str| -> Result<usize, LatticeError> {
                    v.parse().map_err(|_| LatticeError::Parse {
                        line: lineno,
                        msg: format!("invalid node number {:?}", v),
                    })
                };
                let acoustic_score: f64 = score.parse().map_err(|_| LatticeError::Parse {
                    line: lineno,
                    msg: format!("invalid score {:?}", score),
                })?;
                arcs.push(Arc {
                    from: parse_node(from)?,
                    to: parse_node(to)?,
                    word: lookup(word, &mut unknown_words),
                    acoustic_score,
                });
            }
            ["REF", words @ ..] => {
                reference = Some(
                    words
                        .iter()
                        .map(|w| lookup(w, &mut unknown_words))
                        .collect(),
                );
            }
            _ => {
                return Err(LatticeError::Parse {
                    line: lineno,
                    msg: format!("unrecognized line {:?}", line),
                })
            }
        }
    }

    let (node_count, start, end) = header.ok_or(LatticeError::Parse {
        line: 0,
        msg: "missing LATTICE header".into(),
    })?;
    for a in &arcs {
        if a.from >= node_count || a.to >= node_count {
            return Err(LatticeError::Parse {
                line: 0,
                msg: format!("arc references node outside 0..{}", node_count),
            });
        }
    }
    let lattice = Lattice {
        node_count,
        start,
        end,
        arcs,
        reference,
    };
    lattice.validate()?;
    Ok((lattice, unknown_words))
}

/// Total cost of one arc: acoustic plus weighted LM negative log probability.
fn arc_cost(
    arc: &Arc,
    prev: Option<WordId>,
    lm: &Estimator,
    lm_weight: f64,
) -> Result<f64, LatticeError> {
    let p = match prev {
        Some(w1) => lm
            .score(w1, arc.word)
            .map_err(|e| LatticeError::Model(e.to_string()))?,
        None => lm.model().p_unigram(arc.word),
    };
    if p <= 0.0 {
        return Err(LatticeError::Model(format!(
            "zero probability for word id {}",
            arc.word
        )));
    }
    Ok(arc.acoustic_score + lm_weight * -p.ln())
}

/// Decoded best path with its total score and the LM share of that score.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedPath {
    pub words: Vec<WordId>,
    pub total_score: f64,
    pub lm_score: f64,
    pub acoustic_score: f64,
}

/// Minimum-cost start-to-end path under acoustic + weighted LM scoring.
/// Dynamic program over (node, last word) states; score ties break
/// lexicographically by word-id sequence.
pub fn best_path(
    lattice: &Lattice,
    lm: &Estimator,
    lm_weight: f64,
) -> Result<DecodedPath, LatticeError> {
    let out = lattice.out_arcs();
    // best suffix (score, arc sequence) from (node, last word) to end
    type Key = (usize, Option<WordId>);
    type Memo = HashMap<Key, Option<(f64, Vec<usize>)>>;
    let mut memo: Memo = HashMap::new();

    fn suffix(
        lattice: &Lattice,
        out: &[Vec<usize>],
        lm: &Estimator,
        lm_weight: f64,
        node: usize,
        last: Option<WordId>,
        memo: &mut Memo,
    ) -> Result<Option<(f64, Vec<usize>)>, LatticeError> {
        if node == lattice.end {
            return Ok(Some((0.0, Vec::new())));
        }
        if let Some(v) = memo.get(&(node, last)) {
            return Ok(v.clone());
        }
        let mut best: Option<(f64, Vec<usize>)> = None;
        for &ai in &out[node] {
            let arc = &lattice.arcs[ai];
            let cost = arc_cost(arc, last, lm, lm_weight)?;
            if let Some((tail_score, tail)) =
                suffix(lattice, out, lm, lm_weight, arc.to, Some(arc.word), memo)?
            {
                let score = cost + tail_score;
                let mut seq = Vec::with_capacity(tail.len() + 1);
                seq.push(ai);
                seq.extend_from_slice(&tail);
                let better = match &best {
                    None => true,
                    Some((bs, bseq)) => {
                        score < *bs
                            || (score == *bs && words_of(lattice, &seq) < words_of(lattice, bseq))
                    }
                };
                if better {
                    best = Some((score, seq));
                }
            }
        }
        memo.insert((node, last), best.clone());
        Ok(best)
    }

    fn words_of(lattice: &Lattice, arcs: &[usize]) -> Vec<WordId> {
        arcs.iter().map(|&ai| lattice.arcs[ai].word).collect()
    }

    let best = suffix(lattice, &out, lm, lm_weight, lattice.start, None, &mut memo)?
        .ok_or(LatticeError::UnreachableNode(lattice.start))?;

    let words = words_of(lattice, &best.1);
    let mut acoustic = 0.0;
    let mut prev = None;
    let mut lm_part = 0.0;
    for &ai in &best.1 {
        let arc = &lattice.arcs[ai];
        acoustic += arc.acoustic_score;
        lm_part += arc_cost(arc, prev, lm, lm_weight)? - arc.acoustic_score;
        prev = Some(arc.word);
    }
    Ok(DecodedPath {
        words,
        total_score: best.0,
        lm_score: lm_part,
        acoustic_score: acoustic,
    })
}

/// Levenshtein distance with unit substitution/insertion/deletion costs.
pub fn edit_distance(a: &[WordId], b: &[WordId]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Aligns `hyp` to `reference` by minimum edit distance and returns, for each
/// reference position, the hypothesis word aligned to it (`None` for a
/// deletion). Backtrace ties prefer diagonal moves, then deletion.
pub fn align_to_reference(reference: &[WordId], hyp: &[WordId]) -> Vec<Option<WordId>> {
    let n = reference.len();
    let m = hyp.len();
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = d[i - 1][j - 1] + usize::from(reference[i - 1] != hyp[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    let mut out = vec![None; n];
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let sub = d[i - 1][j - 1] + usize::from(reference[i - 1] != hyp[j - 1]);
            if d[i][j] == sub {
                out[i - 1] = Some(hyp[j - 1]);
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[i][j] == d[i - 1][j] + 1 {
            out[i - 1] = None; // deletion
            i -= 1;
            continue;
        }
        j -= 1; // insertion; no reference position
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisagreementReport {
    pub disagreements: u64,
    pub model_a_correct: u64,
    pub model_b_correct: u64,
    pub sign_test_p: f64,
}

/// Two-sided sign test p-value for an (a, b) split of disagreements.
pub fn sign_test_two_sided(a: u64, b: u64) -> f64 {
    let n = a + b;
    if n == 0 {
        return 1.0;
    }
    let x = a.min(b);
    // 2 * P(X <= x) for X ~ Binomial(n, 1/2)
    let mut tail = 0.0f64;
    let mut coeff = 1.0f64; // C(n, 0)
    for i in 0..=x {
        if i > 0 {
            coeff = coeff * (n - i + 1) as f64 / i as f64;
        }
        tail += coeff;
    }
    (2.0 * tail * 0.5f64.powi(n as i32)).min(1.0)
}

/// Decodes each lattice with both models, aligns both hypotheses to the
/// reference transcript, and counts aligned positions where exactly one
/// model's word is correct.
pub fn disagreement_report(
    lattices: &[Lattice],
    model_a: &Estimator,
    model_b: &Estimator,
    lm_weight: f64,
) -> Result<DisagreementReport, LatticeError> {
    let mut a_correct = 0u64;
    let mut b_correct = 0u64;
    for lat in lattices {
        let reference = lat
            .reference
            .as_ref()
            .ok_or(LatticeError::MissingReference)?;
        let hyp_a = best_path(lat, model_a, lm_weight)?.words;
        let hyp_b = best_path(lat, model_b, lm_weight)?.words;
        if hyp_a == hyp_b {
            continue;
        }
        let ali_a = align_to_reference(reference, &hyp_a);
        let ali_b = align_to_reference(reference, &hyp_b);
        for (pos, &ref_word) in reference.iter().enumerate() {
            let wa = ali_a[pos];
            let wb = ali_b[pos];
            if wa == wb {
                continue;
            }
            let a_ok = wa == Some(ref_word);
            let b_ok = wb == Some(ref_word);
            if a_ok && !b_ok {
                a_correct += 1;
            } else if b_ok && !a_ok {
                b_correct += 1;
            }
        }
    }
    Ok(DisagreementReport {
        disagreements: a_correct + b_correct,
        model_a_correct: a_correct,
        model_b_correct: b_correct,
        sign_test_p: sign_test_two_sided(a_correct, b_correct),
    })
}
