use rand::Rng;

use crate::Real;

/// Simultaneous-perturbation gradient estimate from exactly two loss
/// evaluations.
///
/// Draws a Rademacher direction `delta` in `{-1, +1}^d` and returns
/// `(L(theta + eps delta) - L(theta - eps delta)) / (2 eps) * delta`.
/// Each `delta_i` consumes one `bool` from `rng`, in coordinate order.
pub fn spsb_gradient<T, E, F, R>(
    mut loss: F,
    params: &[T],
    epsilon: T,
    rng: &mut R,
) -> Result<Vec<T>, E>
where
    T: Real,
    F: FnMut(&[T]) -> Result<T, E>,
    R: Rng + ?Sized,
{
    let delta: Vec<T> =
        (0..params.len()).map(|_| if rng.gen::<bool>() { T::one() } else { -T::one() }).collect();
    let plus: Vec<T> = params.iter().zip(&delta).map(|(&p, &d)| p + epsilon * d).collect();
    let minus: Vec<T> = params.iter().zip(&delta).map(|(&p, &d)| p - epsilon * d).collect();
    let diff = (loss(&plus)? - loss(&minus)?) / (T::lit(2.0) * epsilon);
    Ok(delta.into_iter().map(|d| diff * d).collect())
}

/// Per-coordinate central difference `(L(theta + h e_i) - L(theta - h e_i)) / 2h`.
pub fn finite_diff_gradient<T, E, F>(mut loss: F, params: &[T], h: T) -> Result<Vec<T>, E>
where
    T: Real,
    F: FnMut(&[T]) -> Result<T, E>,
{
    let mut probe = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        probe[i] = params[i] + h;
        let up = loss(&probe)?;
        probe[i] = params[i] - h;
        let down = loss(&probe)?;
        probe[i] = params[i];
        grad.push((up - down) / (T::lit(2.0) * h));
    }
    Ok(grad)
}

/// Population variance of each coordinate across `samples`. Returns zeros for
/// a single sample and an empty vector for no samples.
pub fn coordinate_variance<T: Real>(samples: &[Vec<T>]) -> Vec<T> {
    let Some(first) = samples.first() else {
        return Vec::new();
    };
    let n = T::from_usize(samples.len()).expect("sample count fits the scalar");
    (0..first.len())
        .map(|i| {
            let mean = samples.iter().fold(T::zero(), |acc, s| acc + s[i]) / n;
            samples.iter().fold(T::zero(), |acc, s| {
                let d = s[i] - mean;
                acc + d * d
            }) / n
        })
        .collect()
}

/// `||estimate - reference|| / ||reference||` in the Euclidean norm.
pub fn relative_l2_error<T: Real>(estimate: &[T], reference: &[T]) -> T {
    let num = estimate
        .iter()
        .zip(reference)
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
        .sqrt();
    let den = reference.iter().fold(T::zero(), |acc, &b| acc + b * b).sqrt();
    num / den
}
