use std::collections::HashMap;
use std::rc::Rc;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::{AutodiffError, Real, Result, Tensor};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Init {
    Zero,
    One,
    /// Normal(0, sigma) resampled until within two standard deviations.
    TruncNormal(f64),
    /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    Uniform { fan_in: usize },
}

impl Init {
    pub fn sample<R: Rng>(self, n: usize, rng: &mut R) -> Vec<f32> {
        match self {
            Init::Zero => vec![0.0; n],
            Init::One => vec![1.0; n],
            Init::TruncNormal(sigma) => {
                let normal = Normal::new(0.0, sigma).expect("finite sigma");
                (0..n)
                    .map(|_| loop {
                        let v: f64 = normal.sample(rng);
                        if v.abs() <= 2.0 * sigma {
                            break v as f32;
                        }
                    })
                    .collect()
            }
            Init::Uniform { fan_in } => {
                let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
                (0..n).map(|_| rng.random_range(-bound..bound) as f32).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub shape: Vec<usize>,
    pub init: Init,
    pub value: Vec<f32>,
}

/// Master copy of named model parameters (single precision).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore {
    params: Vec<Parameter>,
    index: HashMap<String, usize>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add<R: Rng>(&mut self, name: &str, shape: &[usize], init: Init, rng: &mut R) -> Result<usize> {
        if self.index.contains_key(name) {
            return Err(AutodiffError::DuplicateParameter(name.to_string()));
        }
        let n = shape.iter().product();
        self.params.push(Parameter {
            name: name.to_string(),
            shape: shape.to_vec(),
            init,
            value: init.sample(n, rng),
        });
        self.index.insert(name.to_string(), self.params.len() - 1);
        Ok(self.params.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total number of scalars.
    pub fn num_scalars(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    pub fn get(&self, name: &str) -> Option<&Parameter> {
        self.index.get(name).map(|&i| &self.params[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Parameter> {
        self.index.get(name).map(|&i| &mut self.params[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Parameter> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Parameter> {
        self.params.iter_mut()
    }

    /// Fresh graph leaves (requiring grad) holding the current values.
    pub fn snapshot<T: Real>(&self) -> ParamSet<T> {
        ParamSet {
            tensors: self
                .params
                .iter()
                .map(|p| {
                    Tensor::variable(&p.shape, p.value.iter().map(|&v| T::c(v as f64)).collect())
                        .expect("parameter shape matches its values")
                })
                .collect(),
            index: Rc::new(self.index.clone()),
        }
    }

    /// A parameter set over caller-supplied tensors, one per parameter in
    /// store order, e.g. to differentiate with respect to perturbed values.
    pub fn bind<T: Real>(&self, tensors: Vec<Tensor<T>>) -> Result<ParamSet<T>> {
        if tensors.len() != self.params.len() {
            return Err(AutodiffError::ShapeMismatch {
                op: "bind",
                detail: format!("{} tensors for {} parameters", tensors.len(), self.params.len()),
            });
        }
        for (p, t) in self.params.iter().zip(&tensors) {
            if t.shape() != p.shape.as_slice() {
                return Err(AutodiffError::ShapeMismatch {
                    op: "bind",
                    detail: format!("{}: {:?} for {:?}", p.name, t.shape(), p.shape),
                });
            }
        }
        Ok(ParamSet {
            tensors,
            index: Rc::new(self.index.clone()),
        })
    }
}

/// Per-graph parameter leaves, in store order.
pub struct ParamSet<T: Real> {
    tensors: Vec<Tensor<T>>,
    index: Rc<HashMap<String, usize>>,
}

impl<T: Real> ParamSet<T> {
    /// Panics on an unknown name: that is a model-construction bug.
    pub fn get(&self, name: &str) -> &Tensor<T> {
        match self.index.get(name) {
            Some(&i) => &self.tensors[i],
            None => panic!("no parameter named {name}"),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn tensors(&self) -> &[Tensor<T>] {
        &self.tensors
    }

    /// Gradients after backward, zeros where none arrived.
    pub fn grads(&self) -> Vec<Vec<f32>> {
        self.tensors
            .iter()
            .map(|t| t.grad().into_iter().map(|v| v.f64() as f32).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn init_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(Init::Zero.sample(5, &mut rng).iter().all(|&v| v == 0.0));
        let t = Init::TruncNormal(0.02).sample(10_000, &mut rng);
        assert!(t.iter().all(|v| v.abs() <= 0.04));
        let sd = (t.iter().map(|v| (*v as f64).powi(2)).sum::<f64>() / t.len() as f64).sqrt();
        assert!(sd > 0.015 && sd < 0.02, "{sd}");
        let u = Init::Uniform { fan_in: 16 }.sample(1000, &mut rng);
        assert!(u.iter().all(|v| v.abs() < 0.25));
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = ParamStore::new();
        s.add("w", &[2, 2], Init::Zero, &mut rng).unwrap();
        assert_eq!(
            s.add("w", &[1], Init::Zero, &mut rng),
            Err(AutodiffError::DuplicateParameter("w".into()))
        );
        assert_eq!(s.num_scalars(), 4);
    }
}
