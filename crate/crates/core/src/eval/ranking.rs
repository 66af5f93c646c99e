//! Precision and normalized discounted cumulative gain at rank `k` for
//! multi-label predictions.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RankingInstance {
    labels: Vec<bool>,
    scores: Vec<f64>,
}

impl RankingInstance {
    pub fn new(labels: Vec<bool>, scores: Vec<f64>) -> Result<Self> {
        if labels.len() != scores.len() {
            return Err(Error::contract(
                "ranking instance",
                format!("{} labels but {} scores", labels.len(), scores.len()),
            ));
        }
        if scores.iter().any(|s| s.is_nan()) {
            return Err(Error::contract("scores", "NaN score"));
        }
        Ok(RankingInstance { labels, scores })
    }

    /// From a 0/1 label vector.
    pub fn from_binary(labels: &[u8], scores: Vec<f64>) -> Result<Self> {
        let labels = labels
            .iter()
            .map(|&l| match l {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::contract("labels", format!("{other} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels, scores)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn relevant(&self) -> usize {
        self.labels.iter().filter(|l| **l).count()
    }

    /// Label indices by descending score; ties keep the lower index first.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]));
        idx
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.len() {
            return Err(Error::contract("k", format!("{k} is outside 1..={}", self.len())));
        }
        Ok(())
    }
}

pub fn precision_at_k(inst: &RankingInstance, k: usize) -> Result<f64> {
    inst.check_k(k)?;
    let hits = inst.ranking()[..k].iter().filter(|&&l| inst.labels[l]).count();
    Ok(hits as f64 / k as f64)
}

fn discount(position: usize) -> f64 {
    1.0 / ((position + 1) as f64).ln()
}

/// DCG@k with 1-based positions and natural-log discount.
pub fn dcg_at_k(inst: &RankingInstance, k: usize) -> Result<f64> {
    inst.check_k(k)?;
    Ok(inst.ranking()[..k]
        .iter()
        .enumerate()
        .filter(|(_, &l)| inst.labels[l])
        .map(|(pos, _)| discount(pos + 1))
        .sum())
}

/// nDCG@k; zero when no label is relevant.
pub fn ndcg_at_k(inst: &RankingInstance, k: usize) -> Result<f64> {
    let dcg = dcg_at_k(inst, k)?;
    let ideal_len = k.min(inst.relevant());
    if ideal_len == 0 {
        return Ok(0.0);
    }
    let ideal: f64 = (1..=ideal_len).map(discount).sum();
    Ok(dcg / ideal)
}
