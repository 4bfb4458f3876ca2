//! Near-duplicate ("plagiarized") review pairs across products.
//!
//! Reviews are split into sentences and each sentence is normalised to a
//! token sequence. Two sentences are near-duplicates when their token sets
//! have Jaccard similarity of at least 0.8 (or the sequences are identical).
//! A pair's similarity is the share of the shorter review's sentences that
//! have a near-duplicate in the other review.
//!
//! Candidate pairs come from an inverted index over exact sentence
//! fingerprints, so only reviews sharing at least one verbatim (normalised)
//! sentence are ever compared.

mod pairs;

use std::collections::HashMap;

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::stats::{helpfulness_ratio, product_stats};
use crate::text::fingerprint;

pub use crate::text::{normalize_sentence, split_sentences};
pub use pairs::{read_pairs_csv, write_pairs_csv, PlagiarizedPair};

pub const DEFAULT_THRESHOLD: f64 = 0.70;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceSet {
    pub review_id: String,
    /// Normalised token sequence of each sentence, in text order.
    pub sentences: Vec<Vec<String>>,
    /// Sorted, de-duplicated sentence fingerprints.
    pub fingerprints: Vec<u64>,
    token_sets: Vec<Vec<String>>,
}

impl SentenceSet {
    pub fn from_text(review_id: impl Into<String>, text: &str) -> Self {
        let sentences: Vec<Vec<String>> = split_sentences(text).iter().map(|s| normalize_sentence(s)).collect();
        let mut fingerprints: Vec<u64> = sentences.iter().map(|s| fingerprint(s)).collect();
        fingerprints.sort_unstable();
        fingerprints.dedup();
        let token_sets = sentences.iter().map(|s| token_set(s)).collect();
        SentenceSet { review_id: review_id.into(), sentences, fingerprints, token_sets }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Sentences of `self` with at least one near-duplicate in `other`.
    fn matched_in(&self, other: &SentenceSet) -> usize {
        self.sentences
            .iter()
            .zip(&self.token_sets)
            .filter(|(seq, set)| {
                other.sentences.iter().zip(&other.token_sets).any(|(oseq, oset)| near_duplicate(seq, set, oseq, oset))
            })
            .count()
    }
}

fn token_set(tokens: &[String]) -> Vec<String> {
    let mut set = tokens.to_vec();
    set.sort_unstable();
    set.dedup();
    set
}

fn near_duplicate(a_seq: &[String], a_set: &[String], b_seq: &[String], b_set: &[String]) -> bool {
    if a_seq == b_seq {
        return true;
    }
    // sorted-merge intersection
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a_set.len() && j < b_set.len() {
        match a_set[i].cmp(&b_set[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a_set.len() + b_set.len() - inter;
    // jaccard >= 0.8
    5 * inter >= 4 * union
}

/// Token-set Jaccard similarity of at least 0.8, or identical sequences.
pub fn sentence_near_duplicate(s1: &[String], s2: &[String]) -> bool {
    near_duplicate(s1, &token_set(s1), s2, &token_set(s2))
}

/// Fraction of the shorter review's sentences that have a near-duplicate in
/// the other review. With equal sentence counts both directions are scored
/// and the larger is kept, which keeps the measure symmetric. Zero when
/// either review has no sentences.
pub fn pair_similarity(r1: &SentenceSet, r2: &SentenceSet) -> f64 {
    if r1.is_empty() || r2.is_empty() {
        return 0.0;
    }
    let score = |short: &SentenceSet, long: &SentenceSet| short.matched_in(long) as f64 / short.len() as f64;
    match r1.len().cmp(&r2.len()) {
        std::cmp::Ordering::Less => score(r1, r2),
        std::cmp::Ordering::Greater => score(r2, r1),
        std::cmp::Ordering::Equal => score(r1, r2).max(score(r2, r1)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DedupOptions {
    pub threshold: f64,
    /// Skip fingerprint buckets shared by more than this many reviews
    /// (boilerplate sentences such as "Great book."). `None` keeps all.
    pub max_bucket: Option<usize>,
}

impl Default for DedupOptions {
    fn default() -> Self {
        DedupOptions { threshold: DEFAULT_THRESHOLD, max_bucket: None }
    }
}

pub fn find_plagiarized_pairs(corpus: &Corpus, threshold: f64) -> Result<Vec<PlagiarizedPair>> {
    find_plagiarized_pairs_with(corpus, &DedupOptions { threshold, ..DedupOptions::default() })
}

/// All cross-product review pairs with similarity at or above the threshold,
/// sorted by `(review_a, review_b)`.
pub fn find_plagiarized_pairs_with(corpus: &Corpus, opts: &DedupOptions) -> Result<Vec<PlagiarizedPair>> {
    if !(opts.threshold > 0.0 && opts.threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!("threshold must lie in (0, 1], got {}", opts.threshold)));
    }
    let reviews = &corpus.reviews;
    let sets: Vec<SentenceSet> = reviews.par_iter().map(|r| SentenceSet::from_text(&r.review_id, &r.text)).collect();

    let mut index: HashMap<u64, Vec<u32>> = HashMap::new();
    for (i, set) in sets.iter().enumerate() {
        for &fp in &set.fingerprints {
            index.entry(fp).or_default().push(i as u32);
        }
    }

    let mut candidates: Vec<(u32, u32)> = index
        .par_iter()
        .filter(|(_, bucket)| bucket.len() > 1 && opts.max_bucket.is_none_or(|m| bucket.len() <= m))
        .flat_map_iter(|(_, bucket)| {
            bucket.iter().enumerate().flat_map(move |(k, &i)| {
                bucket[k + 1..]
                    .iter()
                    .filter(move |&&j| reviews[i as usize].product_id != reviews[j as usize].product_id)
                    .map(move |&j| (i, j))
            })
        })
        .collect();
    candidates.par_sort_unstable();
    candidates.dedup();

    let stats = product_stats(corpus);
    let mut pairs: Vec<PlagiarizedPair> = candidates
        .par_iter()
        .filter_map(|&(i, j)| {
            let sim = pair_similarity(&sets[i as usize], &sets[j as usize]);
            (sim >= opts.threshold).then_some((i as usize, j as usize, sim))
        })
        .map(|(i, j, sim)| {
            let (a, b) = (&reviews[i], &reviews[j]);
            let (a, b) = if a.review_id <= b.review_id { (a, b) } else { (b, a) };
            let (sa, sb) = (&stats[&a.product_id], &stats[&b.product_id]);
            Ok(PlagiarizedPair {
                review_a: a.review_id.clone(),
                review_b: b.review_id.clone(),
                similarity: sim,
                signed_dev_a: sa.deviation_bin(a.star_rating),
                signed_dev_b: sb.deviation_bin(b.star_rating),
                ratio_a: helpfulness_ratio(a)?,
                ratio_b: helpfulness_ratio(b)?,
                helpful_a: a.helpful_votes,
                total_a: a.total_votes,
                helpful_b: b.helpful_votes,
                total_b: b.total_votes,
            })
        })
        .collect::<Result<_>>()?;
    pairs.sort_by(|x, y| (&x.review_a, &x.review_b).cmp(&(&y.review_a, &y.review_b)));
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Review;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        normalize_sentence(s)
    }

    fn review(id: &str, product: &str, text: &str) -> Review {
        Review {
            review_id: id.into(),
            product_id: product.into(),
            star_rating: 4,
            helpful_votes: 6,
            total_votes: 10,
            text: text.into(),
            version_group: None,
        }
    }

    const FIG4_LIKE: &str = "This set of songs teaches chinese words to young children very well. \
        My daughter sings along with the chinese lyrics every single morning now. \
        The booklet shows each chinese phrase with a picture and a short translation. \
        We have tried many chinese programs and this one kept her attention longest.";

    #[test]
    fn near_duplicate_sentences() {
        let a = toks("one two three four five six seven eight nine chinese");
        let b = toks("one two three four five six seven eight nine korean");
        assert!(sentence_near_duplicate(&a, &a));
        assert!(sentence_near_duplicate(&a, &b)); // 9/11
        assert!(!sentence_near_duplicate(&a, &toks("alpha beta gamma")));
        assert!(sentence_near_duplicate(&[], &[]));
        // 4 shared of 6 -> 0.667
        assert!(!sentence_near_duplicate(&toks("a b c d e"), &toks("a b c d f")));
    }

    #[test]
    fn similarity_examples() {
        let five = "First sentence here. Second one follows. Third is short. Fourth goes on. Fifth ends it.";
        let s = SentenceSet::from_text("a", five);
        assert_eq!(pair_similarity(&s, &s), 1.0);

        let rewritten =
            "First sentence here. Second one follows. Third is short. Fourth goes on. Totally unrelated words appear.";
        let t = SentenceSet::from_text("b", rewritten);
        assert_eq!(pair_similarity(&s, &t), 0.8);

        let korean = SentenceSet::from_text("k", &FIG4_LIKE.replace("chinese", "korean"));
        let chinese = SentenceSet::from_text("c", FIG4_LIKE);
        assert!(chinese.sentences.iter().all(|s| s.len() >= 10));
        assert_eq!(pair_similarity(&chinese, &korean), 1.0);

        let empty = SentenceSet::from_text("e", "");
        assert_eq!(pair_similarity(&empty, &s), 0.0);
    }

    #[test]
    fn shorter_review_embedded_in_longer() {
        let short = SentenceSet::from_text("a", "Second one follows. Third is short.");
        let long =
            SentenceSet::from_text("b", "First sentence here. Second one follows. Third is short. Fourth goes on.");
        assert_eq!(pair_similarity(&short, &long), 1.0);
        assert_eq!(pair_similarity(&long, &short), 1.0);
    }

    #[test]
    fn finds_cross_product_copies_only() {
        let text = "I loved this book. The plot is tight and the characters are vivid.";
        let c = Corpus::new("x", vec![review("r2", "p1", text), review("r1", "p2", text)]);
        let pairs = find_plagiarized_pairs(&c, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!((pairs[0].review_a.as_str(), pairs[0].review_b.as_str(), pairs[0].similarity), ("r1", "r2", 1.0));

        let c = Corpus::new("x", vec![review("r1", "p1", text), review("r2", "p1", text)]);
        assert!(find_plagiarized_pairs(&c, DEFAULT_THRESHOLD).unwrap().is_empty());
    }

    #[test]
    fn pair_context_fields() {
        let text = "Exactly the same words. In both of the reviews.";
        let mut a = review("a", "p1", text);
        a.star_rating = 5;
        a.helpful_votes = 9;
        let mut other = review("z", "p1", "Something else entirely.");
        other.star_rating = 2;
        let b = review("b", "p2", text);
        let pairs = find_plagiarized_pairs(&Corpus::new("x", vec![a, b, other]), 0.7).unwrap();
        assert_eq!(pairs.len(), 1);
        let p = &pairs[0];
        // p1 average 3.5 -> a deviates by +1.5; b is alone on p2
        assert_eq!(p.signed_dev_a.value(), 1.5);
        assert_eq!(p.signed_dev_b.value(), 0.0);
        assert_eq!((p.ratio_a, p.ratio_b), (0.9, 0.6));
        assert_eq!((p.helpful_a, p.total_a, p.helpful_b, p.total_b), (9, 10, 6, 10));
    }

    #[test]
    fn rejects_bad_threshold() {
        let c = Corpus::default();
        assert!(find_plagiarized_pairs(&c, 0.0).is_err());
        assert!(find_plagiarized_pairs(&c, 1.5).is_err());
        assert!(find_plagiarized_pairs(&c, 1.0).unwrap().is_empty());
    }

    #[test]
    fn max_bucket_skips_boilerplate() {
        let reviews = (0..5).map(|i| review(&format!("r{i}"), &format!("p{i}"), "Great book.")).collect();
        let c = Corpus::new("x", reviews);
        assert_eq!(find_plagiarized_pairs(&c, 0.7).unwrap().len(), 10);
        let opts = DedupOptions { max_bucket: Some(4), ..DedupOptions::default() };
        assert!(find_plagiarized_pairs_with(&c, &opts).unwrap().is_empty());
    }

    const WORDS: [&str; 24] = [
        "book", "story", "plot", "reader", "page", "author", "chapter", "hero", "ending", "tale", "voice", "style",
        "world", "idea", "scene", "line", "theme", "mood", "pace", "twist", "detail", "prose", "dialogue", "cover",
    ];

    fn arb_sentence() -> impl Strategy<Value = String> {
        proptest::collection::vec(0usize..WORDS.len(), 3..8)
            .prop_map(|ix| format!("{}.", ix.into_iter().map(|i| WORDS[i]).collect::<Vec<_>>().join(" ")))
    }

    proptest! {
        #[test]
        fn similarity_is_symmetric_and_reflexive(
            a in proptest::collection::vec(arb_sentence(), 1..6),
            b in proptest::collection::vec(arb_sentence(), 1..6),
        ) {
            let x = SentenceSet::from_text("x", &a.join(" "));
            let y = SentenceSet::from_text("y", &b.join(" "));
            prop_assert_eq!(pair_similarity(&x, &y), pair_similarity(&y, &x));
            prop_assert_eq!(pair_similarity(&x, &x), 1.0);
        }

        #[test]
        fn output_is_order_invariant(
            texts in proptest::collection::vec((proptest::collection::vec(arb_sentence(), 1..4), 0u8..4), 2..25),
            seed in any::<u64>(),
        ) {
            let reviews: Vec<Review> = texts.iter().enumerate()
                .map(|(i, (s, p))| review(&format!("r{i:02}"), &format!("p{p}"), &s.join(" ")))
                .collect();
            let c = Corpus::new("x", reviews.clone());
            let mut shuffled = reviews;
            let n = shuffled.len();
            for i in 0..n {
                let j = ((seed >> (i % 48)) as usize + i * 7) % n;
                shuffled.swap(i, j);
            }
            let a = find_plagiarized_pairs(&c, 0.5).unwrap();
            let b = find_plagiarized_pairs(&Corpus::new("x", shuffled), 0.5).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
