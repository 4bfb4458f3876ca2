use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mixture::MixtureModel;
use crate::corpus::{Corpus, Review};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

pub const SIMULATED_LABEL: &str = "simulated";

/// Tolerance-evaluator simulation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub tolerance: f64,
    pub n_evaluators_per_review: u64,
    pub review_scores: Vec<f64>,
    pub n_reviews_per_score: usize,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            tolerance: 0.55,
            n_evaluators_per_review: 1000,
            review_scores: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            n_reviews_per_score: 200,
            seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        if self.n_evaluators_per_review == 0 || self.n_reviews_per_score == 0 {
            return Err(Error::InvalidArgument("evaluator and review counts must be positive".into()));
        }
        if self.review_scores.is_empty() {
            return Err(Error::InvalidArgument("review_scores is empty".into()));
        }
        for &s in &self.review_scores {
            if s.fract() != 0.0 || !(1.0..=5.0).contains(&s) {
                return Err(Error::InvalidArgument(format!("review score {s} is not an integer star in 1..=5")));
            }
        }
        Ok(())
    }
}

/// Expected helpfulness ratio of a review scored `score`.
pub fn expected_ratio(model: &MixtureModel, score: f64, tolerance: f64) -> f64 {
    model.window_mass(score - tolerance, score + tolerance)
}

/// Draws evaluator opinions from `model` and counts a helpful vote whenever
/// the opinion lies within `tolerance` of the review's score.
///
/// Product `j` holds one review per configured score. Review `k` of the
/// flattened list uses its own random stream.
pub fn simulate_helpfulness(model: &MixtureModel, config: &SimulationConfig) -> Result<Corpus> {
    config.validate()?;
    let per_product = config.review_scores.len();
    let total = per_product * config.n_reviews_per_score;
    let reviews: Vec<Review> = (0..total)
        .into_par_iter()
        .map(|index| {
            let (product, slot) = (index / per_product, index % per_product);
            let score = config.review_scores[slot];
            let mut rng = stream_rng(config.seed, index as u64);
            let helpful = (0..config.n_evaluators_per_review)
                .filter(|_| (model.sample(&mut rng) - score).abs() <= config.tolerance)
                .count() as u64;
            Review {
                review_id: format!("sim-r{index:07}"),
                product_id: format!("sim-p{product:05}"),
                star_rating: score as u8,
                helpful_votes: helpful,
                total_votes: config.n_evaluators_per_review,
                text: String::new(),
                version_group: None,
            }
        })
        .collect();
    Ok(Corpus::new(SIMULATED_LABEL, reviews))
}
