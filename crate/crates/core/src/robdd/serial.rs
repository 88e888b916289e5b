//! Standalone node-list form of a BDD and its text encoding.
//!
//! ```text
//! bdd 3 root 3
//! order 5 2
//! 2 2 0 1
//! 3 5 0 2
//! ```
//!
//! Node ids 0 and 1 are the terminals. Each following line is
//! `id var lo hi`, children before parents, so the list is topologically
//! sorted and identical structures serialize identically.

use std::fmt::Write;
use std::sync::Arc;

use super::Order;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::textio::{next_line, num_list};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PackedNode {
    /// Position of the node's variable in the order.
    pub level: u32,
    pub lo: u32,
    pub hi: u32,
}

/// A BDD detached from any store: node `k + 2` is `nodes[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PackedBdd {
    order: Order,
    nodes: Vec<PackedNode>,
    root: u32,
}

impl PackedBdd {
    pub(crate) fn from_raw(order: Vec<u32>, nodes: Vec<PackedNode>, root: u32) -> Self {
        PackedBdd {
            order: order.into(),
            nodes,
            root,
        }
    }

    /// Validating constructor for decoded input.
    pub fn new(order: Vec<u32>, nodes: Vec<PackedNode>, root: u32) -> Result<Self> {
        let level_of = |id: u32, nodes: &[PackedNode]| -> Option<u32> {
            match id {
                0 | 1 => Some(u32::MAX),
                _ => nodes.get(id as usize - 2).map(|n| n.level),
            }
        };
        for (k, n) in nodes.iter().enumerate() {
            let id = k as u32 + 2;
            if n.lo >= id || n.hi >= id {
                return Err(Error::InvalidInput(format!("node {id} refers forward")));
            }
            if n.lo == n.hi || n.level as usize >= order.len() {
                return Err(Error::InvalidInput(format!("node {id} is malformed")));
            }
            let (ll, hl) = (level_of(n.lo, &nodes[..k]), level_of(n.hi, &nodes[..k]));
            if ll.unwrap_or(0) <= n.level || hl.unwrap_or(0) <= n.level {
                return Err(Error::InvalidInput(format!("node {id} breaks the order")));
            }
        }
        if root as usize >= nodes.len() + 2 {
            return Err(Error::InvalidInput("root out of range".into()));
        }
        Ok(PackedBdd {
            order: order.into(),
            nodes,
            root,
        })
    }

    /// The projection `x_v`, or its negation.
    pub fn literal(v: u32, positive: bool) -> Self {
        let (lo, hi) = if positive { (0, 1) } else { (1, 0) };
        PackedBdd {
            order: Arc::from(vec![v]),
            nodes: vec![PackedNode { level: 0, lo, hi }],
            root: 2,
        }
    }

    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn nodes(&self) -> &[PackedNode] {
        &self.nodes
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    /// Reachable nodes, terminals included. Packing keeps only reachable
    /// nodes, so this is the list length plus the terminals in use.
    pub fn node_count(&self) -> usize {
        match self.root {
            0 | 1 => 1,
            _ => self.nodes.len() + 2,
        }
    }

    pub fn evaluate(&self, assignment: &Bits) -> Result<bool> {
        let mut id = self.root;
        while id > 1 {
            let n = self.nodes[id as usize - 2];
            let v = self.order[n.level as usize];
            if v as usize >= assignment.len() {
                return Err(Error::MissingVariable(v));
            }
            id = if assignment.get(v as usize) { n.hi } else { n.lo };
        }
        Ok(id == 1)
    }

    /// Evaluates 64 assignments at once; `var_words[v]` holds variable
    /// `v` across the batch.
    pub fn evaluate_words(&self, var_words: &[u64], scratch: &mut Vec<u64>) -> u64 {
        scratch.clear();
        scratch.push(0);
        scratch.push(!0);
        for n in &self.nodes {
            let x = var_words[self.order[n.level as usize] as usize];
            let v = (x & scratch[n.hi as usize]) | (!x & scratch[n.lo as usize]);
            scratch.push(v);
        }
        scratch[self.root as usize]
    }

    /// Swaps the children of every node labelled `v`.
    pub fn flip_var_branches(&mut self, v: u32) {
        if let Some(p) = self.order.iter().position(|&x| x == v) {
            for n in self.nodes.iter_mut().filter(|n| n.level == p as u32) {
                std::mem::swap(&mut n.lo, &mut n.hi);
            }
            self.renumber();
        }
    }

    /// Restores the canonical lo-first post-order numbering.
    fn renumber(&mut self) {
        if self.root <= 1 {
            return;
        }
        let mut new_id = vec![u32::MAX; self.nodes.len() + 2];
        new_id[0] = 0;
        new_id[1] = 1;
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if new_id[id as usize] != u32::MAX {
                continue;
            }
            let n = self.nodes[id as usize - 2];
            if expanded {
                new_id[id as usize] = out.len() as u32 + 2;
                out.push(PackedNode {
                    level: n.level,
                    lo: new_id[n.lo as usize],
                    hi: new_id[n.hi as usize],
                });
            } else {
                stack.push((id, true));
                stack.push((n.hi, false));
                stack.push((n.lo, false));
            }
        }
        self.root = new_id[self.root as usize];
        self.nodes = out;
    }

    /// Exchanges the terminals, negating the function.
    pub fn swap_terminals(&mut self) {
        let swap = |id: &mut u32| {
            if *id <= 1 {
                *id ^= 1;
            }
        };
        for n in self.nodes.iter_mut() {
            swap(&mut n.lo);
            swap(&mut n.hi);
        }
        swap(&mut self.root);
    }

    /// Variables that label at least one node.
    pub fn support(&self) -> Vec<u32> {
        let mut levels: Vec<u32> = self.nodes.iter().map(|n| n.level).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.into_iter().map(|l| self.order[l as usize]).collect()
    }

    pub fn max_var(&self) -> Option<u32> {
        self.order.iter().copied().max()
    }
}

pub fn format_packed(p: &PackedBdd, out: &mut String) {
    writeln!(out, "bdd {} root {}", p.nodes.len(), p.root).unwrap();
    out.push_str("order");
    for v in p.order.iter() {
        write!(out, " {v}").unwrap();
    }
    out.push('\n');
    for (k, n) in p.nodes.iter().enumerate() {
        writeln!(out, "{} {} {} {}", k + 2, p.order[n.level as usize], n.lo, n.hi).unwrap();
    }
}

pub fn parse_packed<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<PackedBdd> {
    let (hl, head) = next_line(lines, "`bdd` header")?;
    let t: Vec<&str> = head.split_whitespace().collect();
    if t.len() != 4 || t[0] != "bdd" || t[2] != "root" {
        return Err(Error::parse(hl, "expected `bdd <nodes> root <id>`"));
    }
    let count: usize = crate::textio::parse_num(hl, t[1], "node count")?;
    let root: u32 = crate::textio::parse_num(hl, t[3], "root")?;
    let (ol, order_line) = next_line(lines, "`order` line")?;
    let rest = order_line
        .strip_prefix("order")
        .ok_or_else(|| Error::parse(ol, "expected `order ...`"))?;
    let order: Vec<u32> = num_list(ol, rest, "variable")?;
    let mut nodes = Vec::with_capacity(count);
    for k in 0..count {
        let (nl, l) = next_line(lines, "node line")?;
        let v: Vec<u32> = num_list(nl, l, "node field")?;
        if v.len() != 4 || v[0] as usize != k + 2 {
            return Err(Error::parse(nl, format!("expected node `{} var lo hi`", k + 2)));
        }
        let level = order
            .iter()
            .position(|&x| x == v[1])
            .ok_or_else(|| Error::parse(nl, format!("variable {} not in order", v[1])))?;
        nodes.push(PackedNode {
            level: level as u32,
            lo: v[2],
            hi: v[3],
        });
    }
    PackedBdd::new(order, nodes, root).map_err(|e| Error::parse(hl, e.to_string()))
}
