use super::TrainError;
use crate::Real;

/// Class decision; a tie at 0.5 goes to class 1.
pub fn predict<T: Real>(p1: T) -> u8 {
    u8::from(p1 >= T::lit(0.5))
}

fn check(preds: &[u8], labels: &[u8]) -> Result<(), TrainError> {
    if preds.len() != labels.len() {
        return Err(TrainError::LengthMismatch { left: preds.len(), right: labels.len() });
    }
    if preds.is_empty() {
        return Err(TrainError::EmptyInput);
    }
    Ok(())
}

pub fn accuracy(preds: &[u8], labels: &[u8]) -> Result<f64, TrainError> {
    check(preds, labels)?;
    let hits = preds.iter().zip(labels).filter(|(p, y)| p == y).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// F1 of `positive`. Zero when precision + recall is zero.
pub fn f1_score(preds: &[u8], labels: &[u8], positive: u8) -> Result<f64, TrainError> {
    check(preds, labels)?;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &y) in preds.iter().zip(labels) {
        match (p == positive, y == positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}
