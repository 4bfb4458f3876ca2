//! Synthetic corpora for benchmarks and the acceptance suite.

use opineval_core::rng::stream_rng;
use opineval_core::{Corpus, Review};
use rand::seq::IndexedRandom;
use rand::Rng;

const VOCABULARY: usize = 5000;
const REVIEWS_PER_PRODUCT: usize = 4;

pub struct TextGen {
    words: Vec<String>,
}

impl TextGen {
    pub fn new(seed: u64) -> Self {
        let mut rng = stream_rng(seed, u64::MAX);
        let syllables = ["ka", "lo", "mi", "ne", "tu", "ra", "shi", "po", "de", "vu", "gan", "tor", "bel", "sy", "qui"];
        let mut words: Vec<String> = (0..VOCABULARY)
            .map(|k| {
                let n = rng.random_range(1..=3);
                let stem: String = (0..n).map(|_| *syllables.choose(&mut rng).unwrap()).collect();
                format!("{stem}{k}")
            })
            .collect();
        words.sort();
        TextGen { words }
    }

    pub fn sentence<R: Rng + ?Sized>(&self, rng: &mut R) -> String {
        let n = rng.random_range(8..=14);
        let body: Vec<&str> = (0..n).map(|_| self.words.choose(rng).unwrap().as_str()).collect();
        let mut s = body.join(" ");
        s.replace_range(0..1, &s[0..1].to_uppercase());
        s.push('.');
        s
    }

    pub fn review_sentences<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<String> {
        let n = rng.random_range(5..=10);
        (0..n).map(|_| self.sentence(rng)).collect()
    }
}

fn review<R: Rng + ?Sized>(rng: &mut R, index: usize, text: String) -> Review {
    let total = rng.random_range(10..=60);
    Review {
        review_id: format!("r{index:06}"),
        product_id: format!("p{:05}", index / REVIEWS_PER_PRODUCT),
        star_rating: rng.random_range(1..=5),
        helpful_votes: rng.random_range(0..=total),
        total_votes: total,
        text,
        version_group: None,
    }
}

/// `n_reviews` reviews of random text, four per product, with `n_pairs`
/// planted copies. The copy keeps every sentence of its original except up
/// to `rewrite_fraction` of them, which are replaced by fresh text. Pair
/// members always sit on different products. Returns the corpus and the
/// planted `(original, copy)` ids in ascending order.
pub fn planted_corpus(
    n_reviews: usize,
    n_pairs: usize,
    rewrite_fraction: f64,
    seed: u64,
) -> (Corpus, Vec<(String, String)>) {
    assert!(2 * n_pairs <= n_reviews);
    let gen = TextGen::new(seed);
    let mut rng = stream_rng(seed, 0);
    let stride = n_reviews / n_pairs.max(1);
    let mut reviews = Vec::with_capacity(n_reviews);
    let mut planted = Vec::with_capacity(n_pairs);
    let mut pending: Option<Vec<String>> = None;
    for index in 0..n_reviews {
        let pair_slot = index / stride < n_pairs && index % stride < 2 && stride >= 2 * REVIEWS_PER_PRODUCT;
        let sentences = match (pair_slot, pending.take()) {
            (true, None) => {
                let s = gen.review_sentences(&mut rng);
                pending = Some(s.clone());
                s
            }
            (true, Some(mut copy)) => {
                let max_rewrites = (rewrite_fraction * copy.len() as f64).floor() as usize;
                let rewrites = rng.random_range(0..=max_rewrites);
                let mut slots: Vec<usize> = (0..copy.len()).collect();
                for k in 0..rewrites {
                    let pick = rng.random_range(k..slots.len());
                    slots.swap(k, pick);
                    copy[slots[k]] = gen.sentence(&mut rng);
                }
                copy
            }
            (false, _) => gen.review_sentences(&mut rng),
        };
        let mut r = review(&mut rng, index, sentences.join(" "));
        if pair_slot && index % stride == 1 {
            // copy gets a product of its own
            r.product_id = format!("p{:05}", n_reviews / REVIEWS_PER_PRODUCT + index);
            planted.push((reviews.last().map(|o: &Review| o.review_id.clone()).unwrap(), r.review_id.clone()));
        }
        reviews.push(r);
    }
    (Corpus::new("planted", reviews), planted)
}

/// Reviews with random stars and vote counts and no text.
pub fn random_vote_corpus(n_products: usize, max_reviews: usize, seed: u64) -> Corpus {
    let mut rng = stream_rng(seed, 1);
    let mut reviews = Vec::new();
    for p in 0..n_products {
        for _ in 0..rng.random_range(1..=max_reviews) {
            let total = rng.random_range(10..=200);
            reviews.push(Review {
                review_id: format!("v{:07}", reviews.len()),
                product_id: format!("p{p:05}"),
                star_rating: rng.random_range(1..=5),
                helpful_votes: rng.random_range(0..=total),
                total_votes: total,
                text: String::new(),
                version_group: None,
            });
        }
    }
    Corpus::new("votes", reviews)
}
