//! Build a count table from raw sentences and round-trip it through the
//! counts file format.
//!
//!     cargo run --example train_counts

use simbigram::corpus::{build_counts, read_counts, tokenize, write_counts};

fn main() {
    let text = "\
the cat sat on the mat
the dog sat on the rug
a cat and a dog
the mat and the rug
";
    let sentences = tokenize(text);

    // Words seen fewer than 2 times collapse into <unk>.
    let (vocab, counts) = build_counts(&sentences, 2).expect("counting failed");

    println!("vocabulary ({} words):", vocab.len());
    for id in vocab.ids_iter() {
        println!("  {:>3}  {:<6} {}", id, vocab.word(id), counts.unigram(id));
    }
    println!("bigram tokens: {}", counts.total_bigrams());

    let mut bigrams: Vec<_> = counts.bigrams().collect();
    bigrams.sort();
    println!("bigram types:");
    for (w1, w2, c) in bigrams {
        println!("  {} {} {}", vocab.word(w1), vocab.word(w2), c);
    }

    // Serialize and parse back; the table survives unchanged.
    let mut buf = Vec::new();
    write_counts(&mut buf, &counts, &vocab).expect("write failed");
    let (vocab2, counts2) = read_counts(buf.as_slice()).expect("read failed");
    assert_eq!(vocab.words(), vocab2.words());
    assert_eq!(counts.total_bigrams(), counts2.total_bigrams());
    println!("\ncounts file round-trip ok ({} bytes)", buf.len());
}
