//! Adam with explicit, checkpointable moment estimates.

use tch::Tensor;

use crate::error::{Error, Result};

pub const ADAM_EPS: f64 = 1e-8;

/// Adam over a fixed list of named parameters.
#[derive(Debug)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Updates applied so far.
    pub step: u64,
    params: Vec<(String, Tensor)>,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
}

impl Adam {
    pub fn new(params: Vec<(String, Tensor)>, lr: f64, beta1: f64, beta2: f64) -> Self {
        let m = params.iter().map(|(_, p)| p.zeros_like()).collect();
        let v = params.iter().map(|(_, p)| p.zeros_like()).collect();
        Self {
            lr,
            beta1,
            beta2,
            eps: ADAM_EPS,
            step: 0,
            params,
            m,
            v,
        }
    }

    pub fn params(&self) -> &[(String, Tensor)] {
        &self.params
    }

    pub fn param_tensors(&self) -> Vec<Tensor> {
        self.params.iter().map(|(_, p)| p.shallow_clone()).collect()
    }

    /// Gradients of `loss` w.r.t. exactly this optimizer's parameters; other
    /// leaves of the graph accumulate nothing.
    pub fn gradients(&self, loss: &Tensor) -> Vec<Tensor> {
        Tensor::run_backward(&[loss], &self.param_tensors(), false, false)
    }

    /// One update; an undefined gradient counts as zero.
    pub fn apply(&mut self, grads: &[Tensor]) -> Result<()> {
        if grads.len() != self.params.len() {
            return Err(Error::Argument(format!(
                "{} gradients for {} parameters",
                grads.len(),
                self.params.len()
            )));
        }
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powf(self.step as f64);
        let bc2 = 1.0 - self.beta2.powf(self.step as f64);
        tch::no_grad(|| {
            for (i, g) in grads.iter().enumerate() {
                let g = if g.defined() { g.shallow_clone() } else { self.params[i].1.zeros_like() };
                let m = &mut self.m[i];
                let _ = m.g_mul_scalar_(self.beta1);
                let _ = m.g_add_(&(&g * (1.0 - self.beta1)));
                let v = &mut self.v[i];
                let _ = v.g_mul_scalar_(self.beta2);
                let _ = v.g_add_(&(g.square() * (1.0 - self.beta2)));
                let update = (&self.m[i] / bc1) / ((&self.v[i] / bc2).sqrt() + self.eps) * self.lr;
                let _ = self.params[i].1.g_sub_(&update);
            }
        });
        Ok(())
    }

    /// Backpropagates `loss` to this optimizer's parameters and applies one update.
    pub fn minimize(&mut self, loss: &Tensor) -> Result<()> {
        let grads = self.gradients(loss);
        self.apply(&grads)
    }

    /// First and second moments as `m/<name>`, `v/<name>`.
    pub fn state_tensors(&self) -> Vec<(String, Tensor)> {
        let m = self.params.iter().zip(&self.m).map(|((n, _), t)| (format!("m/{n}"), t.shallow_clone()));
        let v = self.params.iter().zip(&self.v).map(|((n, _), t)| (format!("v/{n}"), t.shallow_clone()));
        m.chain(v).collect()
    }

    /// Restores moments written by [`Adam::state_tensors`].
    pub fn load_state(&mut self, step: u64, lookup: &dyn Fn(&str) -> Option<Tensor>) -> Result<()> {
        for (i, (name, p)) in self.params.iter().enumerate() {
            for (prefix, slot) in [("m", &mut self.m[i]), ("v", &mut self.v[i])] {
                let key = format!("{prefix}/{name}");
                let t = lookup(&key).ok_or_else(|| Error::Argument(format!("missing optimizer state '{key}'")))?;
                if t.size() != p.size() {
                    return Err(Error::Shape(format!("optimizer state '{key}': {:?} vs {:?}", t.size(), p.size())));
                }
                tch::no_grad(|| slot.copy_(&t));
            }
        }
        self.step = step;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tch::{Device, Kind};

    /// Scalar reference implementation.
    fn reference(grads: &[f64], lr: f64, b1: f64, b2: f64) -> f64 {
        let (mut p, mut m, mut v) = (1.0f64, 0.0f64, 0.0f64);
        for (t, g) in grads.iter().enumerate() {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t as i32 + 1));
            let vh = v / (1.0 - b2.powi(t as i32 + 1));
            p -= lr * mh / (vh.sqrt() + ADAM_EPS);
        }
        p
    }

    #[test]
    fn matches_scalar_reference() {
        let p = Tensor::ones([1], (Kind::Double, Device::Cpu)).set_requires_grad(true);
        let mut opt = Adam::new(vec![("p".into(), p.shallow_clone())], 0.01, 0.9, 0.999);
        let grads = [0.5, -1.0, 2.0, 0.25];
        for g in grads {
            opt.apply(&[Tensor::from_slice(&[g])]).unwrap();
        }
        let expected = reference(&grads, 0.01, 0.9, 0.999);
        assert!((p.double_value(&[0]) - expected).abs() < 1e-14);
    }

    #[test]
    fn gradients_only_reach_own_parameters() {
        let a = Tensor::from_slice(&[2.0f64]).set_requires_grad(true);
        let b = Tensor::from_slice(&[3.0f64]).set_requires_grad(true);
        let opt = Adam::new(vec![("a".into(), a.shallow_clone())], 0.1, 0.9, 0.999);
        let g = opt.gradients(&(&a * &b).sum(Kind::Double));
        assert_eq!(g[0].double_value(&[0]), 3.0);
        assert!(!b.grad().defined());
    }

    #[test]
    fn state_round_trip() {
        let p = Tensor::zeros([3], (Kind::Float, Device::Cpu)).set_requires_grad(true);
        let mut a = Adam::new(vec![("w".into(), p.shallow_clone())], 0.1, 0.9, 0.99);
        a.apply(&[Tensor::from_slice(&[1.0f32, -2.0, 0.5])]).unwrap();
        let saved = a.state_tensors();
        let q = Tensor::zeros([3], (Kind::Float, Device::Cpu)).set_requires_grad(true);
        let mut b = Adam::new(vec![("w".into(), q)], 0.1, 0.9, 0.99);
        b.load_state(a.step, &|k| saved.iter().find(|(n, _)| n == k).map(|(_, t)| t.copy())).unwrap();
        assert_eq!(b.step, 1);
        for ((_, x), (_, y)) in a.state_tensors().iter().zip(b.state_tensors()) {
            assert!(x.equal(&y));
        }
    }
}
