use super::HeatWeights;
use crate::texstate::{GenerationMask, Label};

/// Weighted share of a view's object pixels worth regenerating:
/// `sum of w(label) over non-Ignore pixels / number of non-Ignore pixels`,
/// or 0 for a view that misses the object.
pub fn compute_view_heat(mask: &GenerationMask, weights: &HeatWeights) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for label in &mask.labels {
        let w = match label {
            Label::Ignore => continue,
            Label::New => weights.new,
            Label::Update => weights.update,
            Label::Keep => weights.keep,
        };
        sum += w;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}
