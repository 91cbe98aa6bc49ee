//! Floating-point evaluation.

use std::collections::HashMap;

use num_traits::ToPrimitive;

use super::{Axis, Expr, ExprError, Node, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Scalar(f64),
    Vector([f64; 3]),
}

impl Value {
    pub fn scalar(self) -> Option<f64> {
        match self {
            Value::Scalar(x) => Some(x),
            Value::Vector(_) => None,
        }
    }

    pub fn vector(self) -> Option<[f64; 3]> {
        match self {
            Value::Vector(v) => Some(v),
            Value::Scalar(0.0) => Some([0.0; 3]),
            Value::Scalar(_) => None,
        }
    }
}

/// Numeric values for scalar symbols and vector symbols.
#[derive(Debug, Clone, Default)]
pub struct Binding {
    pub scalars: HashMap<String, f64>,
    pub vectors: HashMap<String, [f64; 3]>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scalar(mut self, name: &str, x: f64) -> Self {
        self.scalars.insert(name.to_string(), x);
        self
    }

    pub fn vector(mut self, name: &str, v: [f64; 3]) -> Self {
        self.vectors.insert(name.to_string(), v);
        self
    }

    pub fn set_scalar(&mut self, name: &str, x: f64) {
        self.scalars.insert(name.to_string(), x);
    }

    pub fn set_vector(&mut self, name: &str, v: [f64; 3]) {
        self.vectors.insert(name.to_string(), v);
    }
}

fn add(a: Value, b: Value) -> Value {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x + y),
        (Value::Vector(u), Value::Vector(w)) => Value::Vector([u[0] + w[0], u[1] + w[1], u[2] + w[2]]),
        // the rational zero stands in for the zero vector
        (Value::Scalar(_), v @ Value::Vector(_)) | (v @ Value::Vector(_), Value::Scalar(_)) => v,
    }
}

fn mul(a: Value, b: Value) -> Value {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x * y),
        (Value::Scalar(s), Value::Vector(v)) | (Value::Vector(v), Value::Scalar(s)) => {
            Value::Vector([s * v[0], s * v[1], s * v[2]])
        }
        (Value::Vector(_), Value::Vector(_)) => unreachable!("well-kinded product"),
    }
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn vec_of(v: Value) -> [f64; 3] {
    v.vector().expect("well-kinded vector operand")
}

/// Direct IEEE-754 evaluation of the tree.
pub fn eval_numeric(e: &Expr, binding: &Binding) -> Result<Value> {
    Ok(match e.node() {
        Node::Rational(r) => Value::Scalar(r.to_f64().unwrap_or(f64::NAN)),
        Node::Pi => Value::Scalar(std::f64::consts::PI),
        Node::Scalar(s) => Value::Scalar(*binding.scalars.get(s).ok_or_else(|| ExprError::Unbound(s.clone()))?),
        Node::Vector(s) => Value::Vector(*binding.vectors.get(s).ok_or_else(|| ExprError::Unbound(s.clone()))?),
        Node::Sum(items) => {
            let mut acc = eval_numeric(&items[0], binding)?;
            for it in &items[1..] {
                acc = add(acc, eval_numeric(it, binding)?);
            }
            acc
        }
        Node::Product(items) => {
            let mut acc = Value::Scalar(1.0);
            for it in items {
                acc = mul(acc, eval_numeric(it, binding)?);
            }
            acc
        }
        Node::Pow(b, n) => {
            let x = eval_numeric(b, binding)?.scalar().expect("scalar base");
            Value::Scalar(x.powi(*n as i32))
        }
        Node::Dot(a, b) => Value::Scalar(dot3(
            vec_of(eval_numeric(a, binding)?),
            vec_of(eval_numeric(b, binding)?),
        )),
        Node::Cross(a, b) => Value::Vector(cross3(
            vec_of(eval_numeric(a, binding)?),
            vec_of(eval_numeric(b, binding)?),
        )),
        Node::Component(v, ax) => Value::Scalar(vec_of(eval_numeric(v, binding)?)[ax.index()]),
    })
}

#[derive(Debug, Clone)]
enum Op {
    Const(f64),
    Slot(usize),
    VecSlot(usize),
    Sum(Vec<Op>),
    Product(Vec<Op>),
    Pow(Box<Op>, i32),
    Dot(Box<Op>, Box<Op>),
    Cross(Box<Op>, Box<Op>),
    Component(Box<Op>, Axis),
}

/// An expression with its symbols resolved to positional slots, for fast
/// repeated evaluation. Evaluates exactly as [`eval_numeric`] does.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    op: Op,
}

impl CompiledExpr {
    /// `scalars[i]` and `vectors[j]` name the slots passed to [`Self::eval`].
    pub fn compile(e: &Expr, scalars: &[&str], vectors: &[&str]) -> Result<CompiledExpr> {
        fn go(e: &Expr, s: &[&str], v: &[&str]) -> Result<Op> {
            Ok(match e.node() {
                Node::Rational(r) => Op::Const(r.to_f64().unwrap_or(f64::NAN)),
                Node::Pi => Op::Const(std::f64::consts::PI),
                Node::Scalar(n) => Op::Slot(
                    s.iter()
                        .position(|x| x == n)
                        .ok_or_else(|| ExprError::Unbound(n.clone()))?,
                ),
                Node::Vector(n) => Op::VecSlot(
                    v.iter()
                        .position(|x| x == n)
                        .ok_or_else(|| ExprError::Unbound(n.clone()))?,
                ),
                Node::Sum(items) => Op::Sum(items.iter().map(|i| go(i, s, v)).collect::<Result<_>>()?),
                Node::Product(items) => Op::Product(items.iter().map(|i| go(i, s, v)).collect::<Result<_>>()?),
                Node::Pow(b, n) => Op::Pow(Box::new(go(b, s, v)?), *n as i32),
                Node::Dot(a, b) => Op::Dot(Box::new(go(a, s, v)?), Box::new(go(b, s, v)?)),
                Node::Cross(a, b) => Op::Cross(Box::new(go(a, s, v)?), Box::new(go(b, s, v)?)),
                Node::Component(a, ax) => Op::Component(Box::new(go(a, s, v)?), *ax),
            })
        }
        Ok(CompiledExpr {
            op: go(e, scalars, vectors)?,
        })
    }

    pub fn eval(&self, scalars: &[f64], vectors: &[[f64; 3]]) -> Value {
        fn go(op: &Op, s: &[f64], v: &[[f64; 3]]) -> Value {
            match op {
                Op::Const(c) => Value::Scalar(*c),
                Op::Slot(i) => Value::Scalar(s[*i]),
                Op::VecSlot(i) => Value::Vector(v[*i]),
                Op::Sum(items) => {
                    let mut acc = go(&items[0], s, v);
                    for it in &items[1..] {
                        acc = add(acc, go(it, s, v));
                    }
                    acc
                }
                Op::Product(items) => {
                    let mut acc = Value::Scalar(1.0);
                    for it in items {
                        acc = mul(acc, go(it, s, v));
                    }
                    acc
                }
                Op::Pow(b, n) => Value::Scalar(go(b, s, v).scalar().expect("scalar").powi(*n)),
                Op::Dot(a, b) => Value::Scalar(dot3(vec_of(go(a, s, v)), vec_of(go(b, s, v)))),
                Op::Cross(a, b) => Value::Vector(cross3(vec_of(go(a, s, v)), vec_of(go(b, s, v)))),
                Op::Component(a, ax) => Value::Scalar(vec_of(go(a, s, v))[ax.index()]),
            }
        }
        go(&self.op, scalars, vectors)
    }

    pub fn eval_scalar(&self, scalars: &[f64], vectors: &[[f64; 3]]) -> f64 {
        self.eval(scalars, vectors)
            .scalar()
            .expect("compiled expression is scalar")
    }
}
