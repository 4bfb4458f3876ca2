use opineval_core::corpus::{filter_min_votes, load_reviews};
use opineval_core::dedup::{find_plagiarized_pairs_with, DedupOptions};
use opineval_core::mh::verdict_grid;
use opineval_core::model::{expected_ratio, simulate_helpfulness};
use opineval_core::stats::{compare_corpora, deviation_curve};
use opineval_core::{
    Axis, Corpus, CurveMode, Format, HalfBin, Kernel, MixtureModel, Review, SimulationConfig, Verdict,
};

fn simulated(alpha: f64, seed: u64) -> Corpus {
    let model = MixtureModel::new(0.72, alpha, 3.5, Kernel::gaussian(0.6).unwrap()).unwrap();
    let cfg = SimulationConfig { n_evaluators_per_review: 2000, n_reviews_per_score: 10, seed, ..Default::default() };
    simulate_helpfulness(&model, &cfg).unwrap()
}

#[test]
fn simulated_corpus_survives_both_formats() {
    let corpus = simulated(1.2, 4);
    for format in [Format::Jsonl, Format::Csv] {
        let mut buf = Vec::new();
        corpus.write(&mut buf, format).unwrap();
        let back = load_reviews(buf.as_slice(), format, "simulated").unwrap();
        assert_eq!(back, corpus);
        assert_eq!(filter_min_votes(&back, 10).len(), corpus.len());
    }
}

#[test]
fn separated_populations_produce_a_dip_at_the_average() {
    let corpus = simulated(3.0, 9);
    let curve = deviation_curve(&corpus, CurveMode::Signed, None).unwrap();
    let at = |v: f64| curve.median_at(HalfBin::from_value(v).unwrap()).unwrap();
    assert!(at(0.0) < at(-1.0) && at(0.0) < at(1.0));
    let model = MixtureModel::new(0.72, 3.0, 3.5, Kernel::gaussian(0.6).unwrap()).unwrap();
    assert!((at(0.0) - expected_ratio(&model, 3.0, 0.55)).abs() < 0.02);
}

#[test]
fn summaries_cover_every_corpus() {
    let s = compare_corpora(&[simulated(0.3, 1), simulated(3.0, 1)]).unwrap();
    assert_eq!(s.len(), 2);
    assert!(s.iter().all(|c| c.total_reviews == 50 && c.avg_star_variance == Some(2.0)));
}

fn review(id: &str, product: &str, stars: u8, helpful: u64, text: &str) -> Review {
    Review {
        review_id: id.into(),
        product_id: product.into(),
        star_rating: stars,
        helpful_votes: helpful,
        total_votes: 20,
        text: text.into(),
        version_group: None,
    }
}

#[test]
fn copied_reviews_flow_into_a_verdict_grid() {
    let body = |k: usize| format!("Copy number {k} works well. The battery lasts all day long. Shipping took a week.");
    let mut reviews = Vec::new();
    for k in 0..12 {
        let (pa, pb) = (format!("pa{k}"), format!("pb{k}"));
        // copy at the product average gets the helpful votes
        reviews.push(review(&format!("a{k}"), &pa, 4, 16, &body(k)));
        reviews.push(review(&format!("fa{k}"), &pa, 4, 5, &format!("Filler text {k} here.")));
        reviews.push(review(&format!("b{k}"), &pb, 2, 6, &body(k)));
        reviews.push(review(&format!("fb{k}"), &pb, 5, 5, &format!("Other filler {k}.")));
        reviews.push(review(&format!("gb{k}"), &pb, 5, 5, &format!("More filler {k} again.")));
    }
    let corpus = Corpus::new("copies", reviews);
    let pairs = find_plagiarized_pairs_with(&corpus, &DedupOptions::default()).unwrap();
    assert_eq!(pairs.len(), 12);
    assert!(pairs.iter().all(|p| p.similarity == 1.0));
    let grid = verdict_grid(&pairs, Axis::Absolute).unwrap();
    let cell = grid.get(HalfBin::ZERO, HalfBin::from_value(2.0).unwrap()).unwrap();
    assert_eq!(cell.verdict(), Verdict::Greater);
    assert!(grid.render_text().contains('\u{227B}'));
}
