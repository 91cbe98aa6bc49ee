//! Random well-kinded expression trees shared by the property tests.
#![allow(dead_code)]

use friction_workbench::expr::{Axis, Binding, Expr, Value};
use proptest::prelude::*;

pub const SCALARS: [&str; 3] = ["eps", "mu", "beta"];
pub const VECTORS: [&str; 4] = ["E", "H", "D", "B"];

/// Shape of a random expression; `scalar`/`vector` give it a kind.
#[derive(Debug, Clone)]
pub enum Tree {
    Leaf(u8),
    Ratio(i8, u8),
    Inv(u8),
    Add(Box<Tree>, Box<Tree>),
    Mul(Box<Tree>, Box<Tree>),
    Neg(Box<Tree>),
    Pow(Box<Tree>, u8),
    Dot(Box<Tree>, Box<Tree>),
    Cross(Box<Tree>, Box<Tree>),
    Comp(Box<Tree>, u8),
}

/// `sums` admits reciprocals of sums, which cancel only syntactically.
pub fn tree_with(sums: bool) -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![
        4 => (0u8..8).prop_map(Tree::Leaf),
        2 => (-6i8..=6, 1u8..=4).prop_map(|(n, d)| Tree::Ratio(n, d)),
        1 => (0u8..if sums { 6 } else { 4 }).prop_map(Tree::Inv),
    ];
    leaf.prop_recursive(8, 40, 2, |inner| {
        let b = || inner.clone().prop_map(Box::new);
        prop_oneof![
            (b(), b()).prop_map(|(x, y)| Tree::Add(x, y)),
            (b(), b()).prop_map(|(x, y)| Tree::Mul(x, y)),
            b().prop_map(Tree::Neg),
            (b(), 0u8..=3).prop_map(|(x, k)| Tree::Pow(x, k)),
            (b(), b()).prop_map(|(x, y)| Tree::Dot(x, y)),
            (b(), b()).prop_map(|(x, y)| Tree::Cross(x, y)),
            (b(), 0u8..3).prop_map(|(x, a)| Tree::Comp(x, a)),
        ]
    })
}

pub fn tree() -> impl Strategy<Value = Tree> {
    tree_with(false)
}

pub fn axis(a: u8) -> Axis {
    Axis::ALL[a as usize % 3]
}

pub fn ratio(n: i8, d: u8) -> Expr {
    Expr::ratio(n as i64, d as i64).unwrap()
}

// reciprocals only of quantities kept away from zero by the bindings
pub fn inv(i: u8) -> Expr {
    let (eps, mu) = (Expr::scalar("eps"), Expr::scalar("mu"));
    let (base, k) = match i {
        0 => (eps, 1),
        1 => (mu, 1),
        2 => (Expr::pi(), 1),
        3 => (eps.mul(&mu).unwrap(), 2),
        4 => (eps.add(&mu).unwrap(), 1),
        _ => (eps.add(&Expr::integer(1)).unwrap(), 2),
    };
    Expr::pow(base, -k).unwrap()
}

pub fn scalar(t: &Tree) -> Expr {
    match t {
        Tree::Leaf(i) => Expr::scalar(SCALARS[*i as usize % 3]),
        Tree::Ratio(n, d) => ratio(*n, *d),
        Tree::Inv(i) => inv(*i),
        Tree::Add(x, y) => scalar(x).add(&scalar(y)).unwrap(),
        Tree::Mul(x, y) => scalar(x).mul(&scalar(y)).unwrap(),
        Tree::Neg(x) => scalar(x).neg(),
        Tree::Pow(x, k) => Expr::pow(scalar(x), *k as i64).unwrap(),
        Tree::Dot(x, y) => Expr::dot(vector(x), vector(y)).unwrap(),
        Tree::Cross(x, y) => Expr::component(Expr::cross(vector(x), vector(y)).unwrap(), Axis::Z).unwrap(),
        Tree::Comp(x, a) => Expr::component(vector(x), axis(*a)).unwrap(),
    }
}

pub fn vector(t: &Tree) -> Expr {
    let leaf = |i: u8| Expr::vector(VECTORS[i as usize % 4]);
    match t {
        Tree::Leaf(i) => leaf(*i),
        Tree::Ratio(n, d) => ratio(*n, *d).mul(&leaf(*d)).unwrap(),
        Tree::Inv(i) => inv(*i).mul(&leaf(*i)).unwrap(),
        Tree::Add(x, y) => vector(x).add(&vector(y)).unwrap(),
        Tree::Mul(x, y) => scalar(x).mul(&vector(y)).unwrap(),
        Tree::Neg(x) => vector(x).neg(),
        Tree::Pow(x, k) => Expr::pow(scalar(x), *k as i64).unwrap().mul(&vector(x)).unwrap(),
        Tree::Dot(x, y) => Expr::dot(vector(x), vector(y)).unwrap().mul(&vector(y)).unwrap(),
        Tree::Cross(x, y) => Expr::cross(vector(x), vector(y)).unwrap(),
        Tree::Comp(x, a) => Expr::component(vector(x), axis(*a)).unwrap().mul(&leaf(*a)).unwrap(),
    }
}

pub fn expression() -> impl Strategy<Value = Expr> {
    (tree_with(true), any::<bool>()).prop_map(|(t, v)| if v { vector(&t) } else { scalar(&t) })
}

pub fn binding() -> impl Strategy<Value = Binding> {
    let comp = || -1.0..1.0f64;
    let vec3 = move || [comp(), comp(), comp()];
    (0.5..2.0f64, 0.5..2.0f64, -0.5..0.5f64, [vec3(), vec3(), vec3(), vec3()]).prop_map(|(eps, mu, beta, vs)| {
        let mut b = Binding::new().scalar("eps", eps).scalar("mu", mu).scalar("beta", beta);
        for (name, v) in VECTORS.iter().zip(vs) {
            b.set_vector(name, v);
        }
        b
    })
}

pub fn components(v: Value) -> Vec<f64> {
    match v {
        Value::Scalar(x) => vec![x],
        Value::Vector(v) => v.to_vec(),
    }
}
