//! Shared fixtures: plaintext oracles, random access trees, and a small
//! work-splitting helper for the heavier suites.

// the two suites that include this module use different subsets of it
#![allow(dead_code)]

use std::collections::BTreeSet;

use esas::policy::{AccessTree, Node};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn attrs(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Independent plaintext threshold evaluator: a leaf is satisfied when its
/// attribute is held, a gate when at least `threshold` children are.
pub fn tree_satisfied(node: &Node, held: &BTreeSet<String>) -> bool {
    match node {
        Node::Leaf { attribute } => held.contains(attribute),
        Node::Gate {
            threshold,
            children,
        } => {
            children
                .iter()
                .filter(|child| tree_satisfied(child, held))
                .count()
                >= *threshold
        }
    }
}

/// Random access tree with at most `max_leaves` leaves and depth <= 3,
/// leaf attributes drawn (with repetition) from the universe.
pub fn random_tree<R: Rng>(rng: &mut R, universe: &[String], max_leaves: usize) -> AccessTree {
    let budget = rng.gen_range(1..=max_leaves);
    let root = gen_node(rng, universe, budget, 0);
    AccessTree::from_root(root).expect("generated tree is well-formed")
}

fn gen_node<R: Rng>(rng: &mut R, universe: &[String], budget: usize, depth: usize) -> Node {
    if depth >= 3 || budget == 1 || rng.gen_bool(0.35) {
        return Node::Leaf {
            attribute: universe[rng.gen_range(0..universe.len())].clone(),
        };
    }
    let child_count = rng.gen_range(2..=budget.min(4));
    let mut child_budgets = vec![1usize; child_count];
    for _ in 0..(budget - child_count) {
        child_budgets[rng.gen_range(0..child_count)] += 1;
    }
    let children = child_budgets
        .into_iter()
        .map(|b| gen_node(rng, universe, b, depth + 1))
        .collect::<Vec<_>>();
    let threshold = rng.gen_range(1..=child_count);
    Node::Gate {
        threshold,
        children,
    }
}

/// Runs `work` over the items from two threads. Panics (failed
/// assertions) propagate to the caller when the scope joins.
pub fn run_split<T, F>(items: Vec<T>, work: F)
where
    T: Send,
    F: Fn(T) + Sync,
{
    let mid = items.len() / 2;
    let mut items = items;
    let second: Vec<T> = items.split_off(mid);
    let work = &work;
    std::thread::scope(|scope| {
        scope.spawn(move || {
            for item in items {
                work(item);
            }
        });
        for item in second {
            work(item);
        }
    });
}
