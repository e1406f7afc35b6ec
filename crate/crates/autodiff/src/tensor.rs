use std::cell::RefCell;
use std::collections::HashSet;
use std::fmt;
use std::rc::Rc;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::mismatch;
use crate::{AutodiffError, Real, Result};

static NEXT_ID: AtomicUsize = AtomicUsize::new(0);

/// Maps (upstream grad, this node's value, parents) to one optional gradient
/// per parent.
pub(crate) type BackwardFn<T> = Box<dyn Fn(&[T], &[T], &[Tensor<T>]) -> Vec<Option<Vec<T>>>>;

struct Node<T: Real> {
    id: usize,
    shape: Vec<usize>,
    value: Vec<T>,
    requires_grad: bool,
    parents: Vec<Tensor<T>>,
    backward: Option<BackwardFn<T>>,
    grad: RefCell<Option<Vec<T>>>,
}

/// Handle to a node of the computation graph. Cloning is cheap.
pub struct Tensor<T: Real>(Rc<Node<T>>);

impl<T: Real> Clone for Tensor<T> {
    fn clone(&self) -> Self {
        Tensor(Rc::clone(&self.0))
    }
}

impl<T: Real> fmt::Debug for Tensor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tensor")
            .field("id", &self.0.id)
            .field("shape", &self.0.shape)
            .field("requires_grad", &self.0.requires_grad)
            .finish()
    }
}

pub(crate) fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

impl<T: Real> Tensor<T> {
    fn leaf(shape: Vec<usize>, value: Vec<T>, requires_grad: bool) -> Result<Self> {
        if numel(&shape) != value.len() {
            return Err(mismatch(
                "tensor",
                format!("shape {shape:?} needs {} values, got {}", numel(&shape), value.len()),
            ));
        }
        Ok(Tensor(Rc::new(Node {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            shape,
            value,
            requires_grad,
            parents: Vec::new(),
            backward: None,
            grad: RefCell::new(None),
        })))
    }

    /// Constant input that never receives a gradient.
    pub fn new(shape: &[usize], value: Vec<T>) -> Result<Self> {
        Self::leaf(shape.to_vec(), value, false)
    }

    /// Leaf that accumulates a gradient during [`Tensor::backward`].
    pub fn variable(shape: &[usize], value: Vec<T>) -> Result<Self> {
        Self::leaf(shape.to_vec(), value, true)
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::leaf(shape.to_vec(), vec![T::zero(); numel(shape)], false).expect("consistent")
    }

    pub fn full(shape: &[usize], v: T) -> Self {
        Self::leaf(shape.to_vec(), vec![v; numel(shape)], false).expect("consistent")
    }

    pub fn scalar(v: T) -> Self {
        Self::full(&[], v)
    }

    pub(crate) fn from_op(
        shape: Vec<usize>,
        value: Vec<T>,
        parents: Vec<Tensor<T>>,
        backward: BackwardFn<T>,
    ) -> Self {
        debug_assert_eq!(numel(&shape), value.len());
        let requires_grad = parents.iter().any(|p| p.requires_grad());
        let (parents, backward) = if requires_grad {
            (parents, Some(backward))
        } else {
            (Vec::new(), None)
        };
        Tensor(Rc::new(Node {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            shape,
            value,
            requires_grad,
            parents,
            backward,
            grad: RefCell::new(None),
        }))
    }

    pub fn id(&self) -> usize {
        self.0.id
    }

    pub fn shape(&self) -> &[usize] {
        &self.0.shape
    }

    pub fn value(&self) -> &[T] {
        &self.0.value
    }

    pub fn numel(&self) -> usize {
        self.0.value.len()
    }

    pub fn requires_grad(&self) -> bool {
        self.0.requires_grad
    }

    /// Value of a one-element tensor.
    pub fn item(&self) -> T {
        assert_eq!(self.numel(), 1, "item() on tensor of shape {:?}", self.shape());
        self.0.value[0]
    }

    /// Gradient after a backward pass; zeros if none reached this tensor.
    pub fn grad(&self) -> Vec<T> {
        self.0
            .grad
            .borrow()
            .clone()
            .unwrap_or_else(|| vec![T::zero(); self.numel()])
    }

    pub fn has_grad(&self) -> bool {
        self.0.grad.borrow().is_some()
    }

    /// Same values, cut from the graph.
    pub fn detach(&self) -> Self {
        Self::leaf(self.0.shape.clone(), self.0.value.clone(), false).expect("consistent")
    }

    /// Reverse-mode sweep from this scalar. Gradients accumulate on leaves
    /// created with [`Tensor::variable`]; intermediate gradients are freed.
    pub fn backward(&self) -> Result<()> {
        if self.numel() != 1 {
            return Err(AutodiffError::NonScalarLoss(self.shape().to_vec()));
        }
        if !self.requires_grad() {
            return Ok(());
        }
        let mut nodes = Vec::new();
        let mut seen = HashSet::new();
        let mut stack = vec![self.clone()];
        seen.insert(self.id());
        while let Some(t) = stack.pop() {
            for p in &t.0.parents {
                if p.requires_grad() && seen.insert(p.id()) {
                    stack.push(p.clone());
                }
            }
            nodes.push(t);
        }
        nodes.sort_unstable_by_key(|t| std::cmp::Reverse(t.id()));

        accumulate(self, vec![T::one()]);
        for t in &nodes {
            let Some(backward) = &t.0.backward else { continue };
            let Some(g) = t.0.grad.borrow_mut().take() else { continue };
            let grads = backward(&g, &t.0.value, &t.0.parents);
            debug_assert_eq!(grads.len(), t.0.parents.len());
            for (p, pg) in t.0.parents.iter().zip(grads) {
                if let Some(pg) = pg {
                    if p.requires_grad() {
                        debug_assert_eq!(pg.len(), p.numel());
                        accumulate(p, pg);
                    }
                }
            }
        }
        Ok(())
    }
}

fn accumulate<T: Real>(t: &Tensor<T>, g: Vec<T>) {
    let mut slot = t.0.grad.borrow_mut();
    match slot.as_mut() {
        Some(acc) => acc.iter_mut().zip(g).for_each(|(a, b)| *a = *a + b),
        None => *slot = Some(g),
    }
}
