//! Benchmarks live in `benches/`; this crate has no library code beyond the
//! fixtures they share.

use frontforge::grid::{Field, GridSpec};

/// A smooth monotone front on the default grid for weight `a`.
pub fn tanh_front(a: f64) -> Field {
    let spec = GridSpec::for_weight(a).expect("valid weight");
    Field::from_fn(spec, |x, y| 0.5 * (1.0 - (a * (y + 0.3 * x)).tanh()))
}
