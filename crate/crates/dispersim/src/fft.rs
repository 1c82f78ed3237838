//! Shared FFT plan cache.
//!
//! Plans are memoized per transform length so that repeated transforms of the
//! same grid reuse twiddle tables. All transforms are unnormalized; callers
//! apply the coefficient convention themselves.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};

struct PlanCache {
    planner: FftPlanner<f64>,
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
}

static CACHE: Lazy<Mutex<PlanCache>> = Lazy::new(|| {
    Mutex::new(PlanCache {
        planner: FftPlanner::new(),
        forward: HashMap::new(),
        inverse: HashMap::new(),
    })
});

fn forward_plan(len: usize) -> Arc<dyn Fft<f64>> {
    let mut cache = CACHE.lock().unwrap();
    if let Some(plan) = cache.forward.get(&len) {
        return Arc::clone(plan);
    }
    let plan = cache.planner.plan_fft_forward(len);
    cache.forward.insert(len, Arc::clone(&plan));
    plan
}

fn inverse_plan(len: usize) -> Arc<dyn Fft<f64>> {
    let mut cache = CACHE.lock().unwrap();
    if let Some(plan) = cache.inverse.get(&len) {
        return Arc::clone(plan);
    }
    let plan = cache.planner.plan_fft_inverse(len);
    cache.inverse.insert(len, Arc::clone(&plan));
    plan
}

/// In-place 2-D transform of a row-major buffer (`n1` contiguous per row).
///
/// `forward` uses the e^{-i…} kernel, the inverse the e^{+i…} kernel; neither
/// applies a 1/N factor.
pub(crate) fn transform_2d(values: &mut [Complex64], n1: usize, n2: usize, forward: bool) {
    assert_eq!(values.len(), n1 * n2);
    let plan1 = if forward { forward_plan(n1) } else { inverse_plan(n1) };
    let plan2 = if forward { forward_plan(n2) } else { inverse_plan(n2) };

    for row in values.chunks_exact_mut(n1) {
        plan1.process(row);
    }

    let mut column = vec![Complex64::default(); n2];
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            column[i2] = values[i2 * n1 + i1];
        }
        plan2.process(&mut column);
        for i2 in 0..n2 {
            values[i2 * n1 + i1] = column[i2];
        }
    }
}

/// In-place 1-D transform, used by the axis profiles and Hölder norms.
pub(crate) fn transform_1d(values: &mut [Complex64], forward: bool) {
    let plan = if forward {
        forward_plan(values.len())
    } else {
        inverse_plan(values.len())
    };
    plan.process(values);
}
