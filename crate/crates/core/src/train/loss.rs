use super::TrainError;
use crate::Real;

/// Summed binary cross-entropy `-sum[y ln p1 + (1-y) ln(1-p1)]`, natural log,
/// with `p1` clipped to `[clamp, 1 - clamp]`.
pub fn cross_entropy<T: Real>(p1: &[T], labels: &[u8], clamp: T) -> Result<T, TrainError> {
    if p1.len() != labels.len() {
        return Err(TrainError::LengthMismatch { left: p1.len(), right: labels.len() });
    }
    let lo = clamp;
    let hi = T::one() - clamp;
    let mut total = T::zero();
    for (&p, &y) in p1.iter().zip(labels) {
        let p = p.max(lo).min(hi);
        total = total
            - match y {
                0 => (T::one() - p).ln(),
                1 => p.ln(),
                other => return Err(TrainError::InvalidLabel(other)),
            };
    }
    Ok(total)
}
