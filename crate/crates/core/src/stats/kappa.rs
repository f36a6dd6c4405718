use super::StatsError;

/// Quadratic weighted kappa between two raters over ordered `categories`.
///
/// Uses `κ = 1 − n·Σ w·O / Σ w·(h_a ⊗ h_b)` with `w = (i − j)²`, which equals
/// the normalized form and is evaluated in exact integer arithmetic. Two
/// identical single-category vectors give 1.
pub fn quadratic_weighted_kappa(a: &[i64], b: &[i64], categories: &[i64]) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(StatsError::InsufficientData("kappa needs at least one rating pair".into()));
    }
    let k = categories.len();
    let pos = |v: i64| {
        categories
            .iter()
            .position(|&c| c == v)
            .ok_or(StatsError::OutOfRangeCategory(v))
    };
    let mut hist_a = vec![0i128; k];
    let mut hist_b = vec![0i128; k];
    let mut observed: i128 = 0;
    for (&x, &y) in a.iter().zip(b) {
        let (i, j) = (pos(x)?, pos(y)?);
        hist_a[i] += 1;
        hist_b[j] += 1;
        observed += ((i as i128) - (j as i128)).pow(2);
    }
    let mut expected: i128 = 0;
    for (i, &ha) in hist_a.iter().enumerate() {
        for (j, &hb) in hist_b.iter().enumerate() {
            expected += ((i as i128) - (j as i128)).pow(2) * ha * hb;
        }
    }
    if expected == 0 {
        // Both raters used one and the same category throughout.
        return Ok(1.0);
    }
    let n = a.len() as i128;
    Ok(1.0 - (n * observed) as f64 / expected as f64)
}
