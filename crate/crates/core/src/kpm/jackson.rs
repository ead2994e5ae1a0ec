use std::f64::consts::PI;

use super::MomentVector;

/// Jackson kernel coefficients `g_0..=g_order` for an expansion of the
/// given order.
pub fn jackson_coefficients(order: usize) -> Vec<f64> {
    let np1 = (order + 1) as f64;
    let step = PI / np1;
    let cot = step.cos() / step.sin();
    (0..=order)
        .map(|j| {
            if j == 0 {
                return 1.0;
            }
            let jf = j as f64;
            ((np1 - jf) * (step * jf).cos() + (step * jf).sin() * cot) / np1
        })
        .collect()
}

/// Multiplies `mu_j` by `g_j` (coefficients computed for the vector's own
/// order).
pub fn jackson_damp(m: &MomentVector) -> MomentVector {
    let g = jackson_coefficients(m.order());
    let values = m.values().iter().zip(&g[1..]).map(|(v, c)| v * c).collect();
    MomentVector::new(values, m.source()).with_damping(true)
}
