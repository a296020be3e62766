//! Adam with decoupled-from-backward weight decay: the decay term is
//! added to the raw gradient here, inside the step, so gradient checks
//! against the loss stay clean.

use crate::linalg::DenseMatrix;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// First and second moment estimates for both weight matrices, plus the
/// shared step counter.
#[derive(Clone, Debug)]
pub struct AdamState {
    m0: Vec<f64>,
    v0: Vec<f64>,
    m1: Vec<f64>,
    v1: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(w0_len: usize, w1_len: usize) -> AdamState {
        AdamState {
            m0: vec![0.0; w0_len],
            v0: vec![0.0; w0_len],
            m1: vec![0.0; w1_len],
            v1: vec![0.0; w1_len],
            t: 0,
        }
    }

    /// One update of both matrices in place. L2 weight decay is applied by
    /// adding `weight_decay * param` to each gradient entry before the
    /// moment updates.
    pub fn step(
        &mut self,
        w0: &mut DenseMatrix,
        w1: &mut DenseMatrix,
        gw0: &DenseMatrix,
        gw1: &DenseMatrix,
        lr: f64,
        weight_decay: f64,
    ) {
        self.t += 1;
        let t = self.t;
        update(w0.data_mut(), gw0.data(), &mut self.m0, &mut self.v0, t, lr, weight_decay);
        update(w1.data_mut(), gw1.data(), &mut self.m1, &mut self.v1, t, lr, weight_decay);
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }
}

fn update(
    param: &mut [f64],
    grad: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    lr: f64,
    weight_decay: f64,
) {
    debug_assert_eq!(param.len(), grad.len());
    let bc1 = 1.0 - BETA1.powi(t as i32);
    let bc2 = 1.0 - BETA2.powi(t as i32);
    for i in 0..param.len() {
        let g = grad[i] + weight_decay * param[i];
        m[i] = BETA1 * m[i] + (1.0 - BETA1) * g;
        v[i] = BETA2 * v[i] + (1.0 - BETA2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        param[i] -= lr * m_hat / (v_hat.sqrt() + EPS);
    }
}
