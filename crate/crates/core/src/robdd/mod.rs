//! Reduced ordered BDDs with a per-function variable order.
//!
//! Nodes live in *level space*: a node records the position of its variable
//! in the order, not the variable itself. A [`Bdd`] handle pairs a root with
//! its order, so one hash-consed [`Store`] can hold functions over different
//! orders while sharing structure. Binary operations require both operands
//! to carry the same order and refuse otherwise.
//!
//! Terminals are node 0 (false) and node 1 (true). Complement edges are not
//! used, so [`Store::node_count`] counts exactly the nodes drawn in a plain
//! diagram, terminals included.

mod serial;

use std::collections::{HashMap, HashSet};
use std::num::NonZeroUsize;
use std::sync::Arc;

use lru::LruCache;

use crate::bits::Bits;
use crate::error::{Error, Result};

pub use serial::{format_packed, parse_packed, PackedBdd, PackedNode};

pub type NodeId = u32;
pub const FALSE: NodeId = 0;
pub const TRUE: NodeId = 1;
const TERMINAL_LEVEL: u32 = u32::MAX;

/// Default bound on memoized operation results per store.
pub const DEFAULT_CACHE_CAPACITY: usize = 1 << 15;

/// Variable ids listed from the root level down.
pub type Order = Arc<[u32]>;

pub fn order_of(vars: impl IntoIterator<Item = u32>) -> Order {
    vars.into_iter().collect::<Vec<_>>().into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Node {
    level: u32,
    lo: NodeId,
    hi: NodeId,
}

/// A function handle: root node plus the variable order it is read in.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bdd {
    root: NodeId,
    order: Order,
}

impl Bdd {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn as_const(&self) -> Option<bool> {
        match self.root {
            FALSE => Some(false),
            TRUE => Some(true),
            _ => None,
        }
    }

    pub fn position(&self, var: u32) -> Option<u32> {
        position(&self.order, var)
    }
}

fn position(order: &[u32], var: u32) -> Option<u32> {
    order.iter().position(|&v| v == var).map(|p| p as u32)
}

fn same_order(a: &Order, b: &Order) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Binary Boolean operator given by its truth table: bit `2a + b` is the
/// result for operands `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BinOp(u8);

impl BinOp {
    pub const AND: BinOp = BinOp(0b1000);
    pub const OR: BinOp = BinOp(0b1110);
    pub const XOR: BinOp = BinOp(0b0110);
    pub const XNOR: BinOp = BinOp(0b1001);
    pub const NAND: BinOp = BinOp(0b0111);
    pub const NOR: BinOp = BinOp(0b0001);
    /// `a & !b`
    pub const DIFF: BinOp = BinOp(0b0100);
    /// `!a | b`
    pub const IMP: BinOp = BinOp(0b1101);

    pub fn from_table(table: u8) -> Self {
        BinOp(table & 0xf)
    }

    #[inline]
    pub fn eval(self, a: bool, b: bool) -> bool {
        self.0 >> ((a as u8) << 1 | b as u8) & 1 == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum CacheKey {
    Apply(u8, NodeId, NodeId),
    Ite(NodeId, NodeId, NodeId),
    Restrict(NodeId, u32, bool),
}

/// Hash-consed node store with a bounded operation cache.
///
/// A store is single-threaded; independent stores can be used from
/// different threads.
pub struct Store {
    nodes: Vec<Node>,
    unique: HashMap<Node, NodeId>,
    cache: LruCache<CacheKey, NodeId>,
}

impl Default for Store {
    fn default() -> Self {
        Store::new()
    }
}

impl Store {
    pub fn new() -> Self {
        Store::with_cache_capacity(DEFAULT_CACHE_CAPACITY)
    }

    pub fn with_cache_capacity(capacity: usize) -> Self {
        let term = Node {
            level: TERMINAL_LEVEL,
            lo: 0,
            hi: 0,
        };
        // unbounded then resized, so the map is not preallocated at full size
        let mut cache = LruCache::unbounded();
        cache.resize(NonZeroUsize::new(capacity.max(1)).expect("nonzero"));
        Store {
            nodes: vec![term, Node { lo: 1, hi: 1, ..term }],
            unique: HashMap::new(),
            cache,
        }
    }

    /// Total nodes allocated, terminals included.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    fn level(&self, id: NodeId) -> u32 {
        self.nodes[id as usize].level
    }

    #[inline]
    fn node(&self, id: NodeId) -> Node {
        self.nodes[id as usize]
    }

    fn mk(&mut self, level: u32, lo: NodeId, hi: NodeId) -> NodeId {
        if lo == hi {
            return lo;
        }
        debug_assert!(self.level(lo) > level && self.level(hi) > level, "order violated");
        let n = Node { level, lo, hi };
        if let Some(&id) = self.unique.get(&n) {
            return id;
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(n);
        self.unique.insert(n, id);
        id
    }

    /// Cofactors of `f` with respect to `level`.
    #[inline]
    fn cofactors(&self, f: NodeId, level: u32) -> (NodeId, NodeId) {
        let n = self.node(f);
        if n.level == level {
            (n.lo, n.hi)
        } else {
            (f, f)
        }
    }

    pub fn constant(&self, value: bool, order: &Order) -> Bdd {
        Bdd {
            root: value as NodeId,
            order: order.clone(),
        }
    }

    /// Constant over the empty order.
    pub fn bdd_const(&self, value: bool) -> Bdd {
        self.constant(value, &order_of([]))
    }

    /// The projection `x_v` over the single-variable order `[v]`.
    pub fn bdd_var(&mut self, v: u32) -> Bdd {
        let order = order_of([v]);
        self.var_in(v, &order).expect("v is in its own order")
    }

    /// The projection `x_v` read in `order`.
    pub fn var_in(&mut self, v: u32, order: &Order) -> Result<Bdd> {
        self.literal(v, true, order)
    }

    /// `x_v` when `positive`, else `!x_v`.
    pub fn literal(&mut self, v: u32, positive: bool, order: &Order) -> Result<Bdd> {
        let p = position(order, v).ok_or(Error::MissingVariable(v))?;
        let root = if positive {
            self.mk(p, FALSE, TRUE)
        } else {
            self.mk(p, TRUE, FALSE)
        };
        Ok(Bdd {
            root,
            order: order.clone(),
        })
    }

    /// Builds the BDD of an explicit function of the variables in `order`;
    /// `f` receives an assignment indexed by position (bit `k` is the value
    /// of `order[k]`). Exponential; meant for small orders and tests.
    pub fn from_fn(&mut self, order: &Order, f: impl Fn(u64) -> bool) -> Bdd {
        fn rec(s: &mut Store, level: u32, len: u32, acc: u64, f: &dyn Fn(u64) -> bool) -> NodeId {
            if level == len {
                return f(acc) as NodeId;
            }
            let lo = rec(s, level + 1, len, acc, f);
            let hi = rec(s, level + 1, len, acc | 1 << level, f);
            s.mk(level, lo, hi)
        }
        let root = rec(self, 0, order.len() as u32, 0, &f);
        Bdd {
            root,
            order: order.clone(),
        }
    }

    fn check_orders(a: &Bdd, b: &Bdd) -> Result<()> {
        if same_order(&a.order, &b.order) {
            Ok(())
        } else {
            Err(Error::OrderMismatch(format!(
                "{:?} vs {:?}",
                &a.order[..],
                &b.order[..]
            )))
        }
    }

    pub fn apply(&mut self, op: BinOp, f: &Bdd, g: &Bdd) -> Result<Bdd> {
        Self::check_orders(f, g)?;
        let root = self.apply_rec(op.0, f.root, g.root);
        Ok(Bdd {
            root,
            order: f.order.clone(),
        })
    }

    pub fn and(&mut self, f: &Bdd, g: &Bdd) -> Result<Bdd> {
        self.apply(BinOp::AND, f, g)
    }

    pub fn or(&mut self, f: &Bdd, g: &Bdd) -> Result<Bdd> {
        self.apply(BinOp::OR, f, g)
    }

    pub fn xor(&mut self, f: &Bdd, g: &Bdd) -> Result<Bdd> {
        self.apply(BinOp::XOR, f, g)
    }

    pub fn not(&mut self, f: &Bdd) -> Bdd {
        self.swap_terminals(f)
    }

    fn apply_rec(&mut self, op: u8, f: NodeId, g: NodeId) -> NodeId {
        let at = |a: NodeId, b: NodeId| (op >> (a << 1 | b) & 1) as NodeId;
        if f <= TRUE && g <= TRUE {
            return at(f, g);
        }
        // one terminal operand reduces the operator to a unary function
        if f <= TRUE {
            let (r0, r1) = (at(f, 0), at(f, 1));
            match (r0, r1) {
                (0, 0) => return FALSE,
                (1, 1) => return TRUE,
                (0, 1) => return g,
                _ => {}
            }
        }
        if g <= TRUE {
            let (r0, r1) = (at(0, g), at(1, g));
            match (r0, r1) {
                (0, 0) => return FALSE,
                (1, 1) => return TRUE,
                (0, 1) => return f,
                _ => {}
            }
        }
        if f == g {
            match (at(0, 0), at(1, 1)) {
                (0, 0) => return FALSE,
                (1, 1) => return TRUE,
                (0, 1) => return f,
                _ => {}
            }
        }
        let key = CacheKey::Apply(op, f, g);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let top = self.level(f).min(self.level(g));
        let (f0, f1) = self.cofactors(f, top);
        let (g0, g1) = self.cofactors(g, top);
        let lo = self.apply_rec(op, f0, g0);
        let hi = self.apply_rec(op, f1, g1);
        let r = self.mk(top, lo, hi);
        self.cache.put(key, r);
        r
    }

    /// `if f then g else h`.
    pub fn ite(&mut self, f: &Bdd, g: &Bdd, h: &Bdd) -> Result<Bdd> {
        Self::check_orders(f, g)?;
        Self::check_orders(f, h)?;
        let root = self.ite_rec(f.root, g.root, h.root);
        Ok(Bdd {
            root,
            order: f.order.clone(),
        })
    }

    fn ite_rec(&mut self, f: NodeId, g: NodeId, h: NodeId) -> NodeId {
        if f == TRUE {
            return g;
        }
        if f == FALSE {
            return h;
        }
        if g == h {
            return g;
        }
        if g == TRUE && h == FALSE {
            return f;
        }
        let key = CacheKey::Ite(f, g, h);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let top = self.level(f).min(self.level(g)).min(self.level(h));
        let (f0, f1) = self.cofactors(f, top);
        let (g0, g1) = self.cofactors(g, top);
        let (h0, h1) = self.cofactors(h, top);
        let lo = self.ite_rec(f0, g0, h0);
        let hi = self.ite_rec(f1, g1, h1);
        let r = self.mk(top, lo, hi);
        self.cache.put(key, r);
        r
    }

    /// Cofactor `f|_{v = value}`; a variable outside the order is a no-op.
    pub fn restrict(&mut self, f: &Bdd, v: u32, value: bool) -> Bdd {
        let root = match f.position(v) {
            Some(p) => self.restrict_rec(f.root, p, value),
            None => f.root,
        };
        Bdd {
            root,
            order: f.order.clone(),
        }
    }

    fn restrict_rec(&mut self, f: NodeId, level: u32, value: bool) -> NodeId {
        let n = self.node(f);
        if n.level > level {
            return f;
        }
        if n.level == level {
            return if value { n.hi } else { n.lo };
        }
        let key = CacheKey::Restrict(f, level, value);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let lo = self.restrict_rec(n.lo, level, value);
        let hi = self.restrict_rec(n.hi, level, value);
        let r = self.mk(n.level, lo, hi);
        self.cache.put(key, r);
        r
    }

    /// `f` with variable `v` replaced by the function `g`.
    pub fn compose(&mut self, f: &Bdd, v: u32, g: &Bdd) -> Result<Bdd> {
        Self::check_orders(f, g)?;
        if f.position(v).is_none() {
            return Ok(f.clone());
        }
        let f1 = self.restrict(f, v, true);
        let f0 = self.restrict(f, v, false);
        self.ite(g, &f1, &f0)
    }

    /// Simultaneous substitution read in `order`: every variable `v` of `f`
    /// becomes `subs[v]`, or the projection `x_v` when absent. All
    /// substitutes must carry `order`; `f` may use any order.
    pub fn vector_compose(
        &mut self,
        f: &Bdd,
        subs: &HashMap<u32, Bdd>,
        order: &Order,
    ) -> Result<Bdd> {
        for g in subs.values() {
            if !same_order(g.order(), order) {
                return Err(Error::OrderMismatch("substitute read in another order".into()));
            }
        }
        let mut level_subs: Vec<NodeId> = Vec::with_capacity(f.order.len());
        for &v in f.order.iter() {
            let id = match subs.get(&v) {
                Some(g) => g.root,
                None => match position(order, v) {
                    Some(p) => self.mk(p, FALSE, TRUE),
                    // unused variables of f need no image
                    None => NodeId::MAX,
                },
            };
            level_subs.push(id);
        }
        let mut memo = HashMap::new();
        let root = self.vcompose_rec(f.root, &level_subs, &f.order, &mut memo)?;
        Ok(Bdd {
            root,
            order: order.clone(),
        })
    }

    fn vcompose_rec(
        &mut self,
        f: NodeId,
        subs: &[NodeId],
        from: &Order,
        memo: &mut HashMap<NodeId, NodeId>,
    ) -> Result<NodeId> {
        if f <= TRUE {
            return Ok(f);
        }
        if let Some(&r) = memo.get(&f) {
            return Ok(r);
        }
        let n = self.node(f);
        let g = subs[n.level as usize];
        if g == NodeId::MAX {
            return Err(Error::MissingVariable(from[n.level as usize]));
        }
        let lo = self.vcompose_rec(n.lo, subs, from, memo)?;
        let hi = self.vcompose_rec(n.hi, subs, from, memo)?;
        let r = self.ite_rec(g, hi, lo);
        memo.insert(f, r);
        Ok(r)
    }

    /// Exchanges the variables at `level` and `level + 1`.
    pub fn swap_adjacent(&mut self, f: &Bdd, level: u32) -> Result<Bdd> {
        if level as usize + 1 >= f.order.len() {
            return Err(Error::InvalidInput(format!(
                "cannot swap level {level} in an order of length {}",
                f.order.len()
            )));
        }
        let mut memo = HashMap::new();
        let root = self.swap_rec(f.root, level, &mut memo);
        let mut order = f.order.to_vec();
        order.swap(level as usize, level as usize + 1);
        Ok(Bdd {
            root,
            order: order.into(),
        })
    }

    fn swap_rec(&mut self, f: NodeId, k: u32, memo: &mut HashMap<NodeId, NodeId>) -> NodeId {
        let n = self.node(f);
        if n.level > k + 1 {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let r = if n.level < k {
            let lo = self.swap_rec(n.lo, k, memo);
            let hi = self.swap_rec(n.hi, k, memo);
            self.mk(n.level, lo, hi)
        } else if n.level == k + 1 {
            // tests only the lower variable, which moves up
            self.mk(k, n.lo, n.hi)
        } else {
            let (f00, f01) = self.cofactors(n.lo, k + 1);
            let (f10, f11) = self.cofactors(n.hi, k + 1);
            let lo = self.mk(k + 1, f00, f10);
            let hi = self.mk(k + 1, f01, f11);
            self.mk(k, lo, hi)
        };
        memo.insert(f, r);
        r
    }

    /// Moves `v` to the end of the order by adjacent swaps. A variable not
    /// in the order leaves `f` unchanged.
    pub fn reorder_var_last(&mut self, f: &Bdd, v: u32) -> Bdd {
        let Some(p) = f.position(v) else {
            return f.clone();
        };
        let mut cur = f.clone();
        for k in p..f.order.len() as u32 - 1 {
            cur = self.swap_adjacent(&cur, k).expect("level in range");
        }
        cur
    }

    /// The same function read in `order`, which must contain every
    /// variable `f` depends on.
    pub fn reorder_to(&mut self, f: &Bdd, order: &Order) -> Result<Bdd> {
        if same_order(&f.order, order) {
            return Ok(f.clone());
        }
        let support_levels = self.support_levels(f.root);
        let mut map = vec![u32::MAX; f.order.len()];
        for &l in &support_levels {
            let v = f.order[l as usize];
            map[l as usize] = position(order, v).ok_or(Error::MissingVariable(v))?;
        }
        let mut sorted = support_levels.clone();
        sorted.sort_unstable();
        let monotone = sorted
            .windows(2)
            .all(|w| map[w[0] as usize] < map[w[1] as usize]);
        let mut memo = HashMap::new();
        let root = if monotone {
            self.relabel_rec(f.root, &map, &mut memo)
        } else {
            let target = order.clone();
            self.transfer_rec(f.root, &f.order, &target, &mut memo)
        };
        Ok(Bdd {
            root,
            order: order.clone(),
        })
    }

    fn relabel_rec(&mut self, f: NodeId, map: &[u32], memo: &mut HashMap<NodeId, NodeId>) -> NodeId {
        if f <= TRUE {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let n = self.node(f);
        let lo = self.relabel_rec(n.lo, map, memo);
        let hi = self.relabel_rec(n.hi, map, memo);
        let r = self.mk(map[n.level as usize], lo, hi);
        memo.insert(f, r);
        r
    }

    fn transfer_rec(
        &mut self,
        f: NodeId,
        from: &Order,
        to: &Order,
        memo: &mut HashMap<NodeId, NodeId>,
    ) -> NodeId {
        if f <= TRUE {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let n = self.node(f);
        let lo = self.transfer_rec(n.lo, from, to, memo);
        let hi = self.transfer_rec(n.hi, from, to, memo);
        let p = position(to, from[n.level as usize]).expect("checked by caller");
        let x = self.mk(p, FALSE, TRUE);
        let r = self.ite_rec(x, hi, lo);
        memo.insert(f, r);
        r
    }

    /// BDD of `x -> f(x with v negated)`: swaps the children of every node
    /// labelled `v`. The node count is unchanged.
    pub fn flip_var_branches(&mut self, f: &Bdd, v: u32) -> Bdd {
        let root = match f.position(v) {
            Some(p) => {
                let mut memo = HashMap::new();
                self.flip_rec(f.root, p, &mut memo)
            }
            None => f.root,
        };
        Bdd {
            root,
            order: f.order.clone(),
        }
    }

    fn flip_rec(&mut self, f: NodeId, level: u32, memo: &mut HashMap<NodeId, NodeId>) -> NodeId {
        let n = self.node(f);
        if n.level > level {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let r = if n.level == level {
            self.mk(level, n.hi, n.lo)
        } else {
            let lo = self.flip_rec(n.lo, level, memo);
            let hi = self.flip_rec(n.hi, level, memo);
            self.mk(n.level, lo, hi)
        };
        memo.insert(f, r);
        r
    }

    /// `!f`, obtained by exchanging the two terminals.
    pub fn swap_terminals(&mut self, f: &Bdd) -> Bdd {
        let mut memo = HashMap::new();
        let root = self.negate_rec(f.root, &mut memo);
        Bdd {
            root,
            order: f.order.clone(),
        }
    }

    fn negate_rec(&mut self, f: NodeId, memo: &mut HashMap<NodeId, NodeId>) -> NodeId {
        if f <= TRUE {
            return f ^ 1;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let n = self.node(f);
        let lo = self.negate_rec(n.lo, memo);
        let hi = self.negate_rec(n.hi, memo);
        let r = self.mk(n.level, lo, hi);
        memo.insert(f, r);
        r
    }

    /// Follows one path from the root; `assignment` is indexed by variable.
    pub fn evaluate(&self, f: &Bdd, assignment: &Bits) -> Result<bool> {
        let mut id = f.root;
        while id > TRUE {
            let n = self.node(id);
            let v = f.order[n.level as usize];
            if v as usize >= assignment.len() {
                return Err(Error::MissingVariable(v));
            }
            id = if assignment.get(v as usize) { n.hi } else { n.lo };
        }
        Ok(id == TRUE)
    }

    fn reachable(&self, root: NodeId) -> Vec<NodeId> {
        let mut seen = HashSet::new();
        let mut stack = vec![root];
        let mut out = Vec::new();
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            out.push(id);
            if id > TRUE {
                let n = self.node(id);
                stack.push(n.lo);
                stack.push(n.hi);
            }
        }
        out
    }

    /// Nodes reachable from the root, terminals included.
    pub fn node_count(&self, f: &Bdd) -> usize {
        self.reachable(f.root).len()
    }

    fn support_levels(&self, root: NodeId) -> Vec<u32> {
        let mut levels: Vec<u32> = self
            .reachable(root)
            .into_iter()
            .filter(|&id| id > TRUE)
            .map(|id| self.level(id))
            .collect();
        levels.sort_unstable();
        levels.dedup();
        levels
    }

    /// Variables the function depends on, in order position.
    pub fn support(&self, f: &Bdd) -> Vec<u32> {
        self.support_levels(f.root)
            .into_iter()
            .map(|l| f.order[l as usize])
            .collect()
    }

    /// Scans the diagram for violations of ordering or reduction; used as a
    /// structural self-check.
    pub fn check_reduced(&self, f: &Bdd) -> Result<()> {
        let mut seen = HashSet::new();
        for id in self.reachable(f.root) {
            if id <= TRUE {
                continue;
            }
            let n = self.node(id);
            if n.lo == n.hi {
                return Err(Error::Internal(format!("node {id} has equal children")));
            }
            if self.level(n.lo) <= n.level || self.level(n.hi) <= n.level {
                return Err(Error::Internal(format!("node {id} breaks the order")));
            }
            if n.level as usize >= f.order.len() {
                return Err(Error::Internal(format!("node {id} level outside order")));
            }
            if !seen.insert(n) {
                return Err(Error::Internal(format!("duplicate node {n:?}")));
            }
        }
        Ok(())
    }

    /// Exports `f` as a standalone node list.
    pub fn pack(&self, f: &Bdd) -> PackedBdd {
        let mut ids: HashMap<NodeId, u32> = HashMap::new();
        ids.insert(FALSE, 0);
        ids.insert(TRUE, 1);
        let mut nodes = Vec::new();
        // iterative post-order, lo before hi
        let mut stack = vec![(f.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if ids.contains_key(&id) {
                continue;
            }
            let n = self.node(id);
            if expanded {
                ids.insert(id, nodes.len() as u32 + 2);
                nodes.push(PackedNode {
                    level: n.level,
                    lo: ids[&n.lo],
                    hi: ids[&n.hi],
                });
            } else {
                stack.push((id, true));
                stack.push((n.hi, false));
                stack.push((n.lo, false));
            }
        }
        PackedBdd::from_raw(f.order.to_vec(), nodes, ids[&f.root])
    }

    /// Imports a packed diagram into this store.
    pub fn unpack(&mut self, p: &PackedBdd) -> Bdd {
        let mut map: Vec<NodeId> = vec![FALSE, TRUE];
        for n in p.nodes() {
            let id = self.mk(n.level, map[n.lo as usize], map[n.hi as usize]);
            map.push(id);
        }
        Bdd {
            root: map[p.root() as usize],
            order: p.order().clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_fn(rng: &mut ChaCha8Rng, vars: u32) -> Vec<bool> {
        (0..1u64 << vars).map(|_| rng.gen()).collect()
    }

    /// Builds a BDD from a truth table indexed by variable id.
    fn build(s: &mut Store, order: &Order, table: &[bool]) -> Bdd {
        let o = order.clone();
        s.from_fn(order, move |pos| {
            let mut x = 0usize;
            for (k, &v) in o.iter().enumerate() {
                if pos >> k & 1 == 1 {
                    x |= 1 << v;
                }
            }
            table[x]
        })
    }

    fn table_of(s: &Store, f: &Bdd, vars: u32) -> Vec<bool> {
        (0..1u64 << vars)
            .map(|x| s.evaluate(f, &Bits::from_u64(x, vars as usize)).unwrap())
            .collect()
    }

    #[test]
    fn constants_and_vars() {
        let mut s = Store::new();
        let t = s.bdd_const(true);
        assert_eq!(t.as_const(), Some(true));
        assert_eq!(s.node_count(&s.bdd_const(false)), 1);
        let v = s.bdd_var(4);
        assert_eq!(s.node_count(&v), 3);
        assert!(s.evaluate(&v, &Bits::from_indices(5, [4])).unwrap());
        assert!(!s.evaluate(&v, &Bits::zeros(5)).unwrap());
        assert!(matches!(
            s.evaluate(&v, &Bits::zeros(3)),
            Err(Error::MissingVariable(4))
        ));
    }

    #[test]
    fn apply_identities_and_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let order = order_of([3, 0, 5, 1, 4, 2]);
        for _ in 0..30 {
            let mut s = Store::new();
            let ta = random_fn(&mut rng, 6);
            let tb = random_fn(&mut rng, 6);
            let a = build(&mut s, &order, &ta);
            let b = build(&mut s, &order, &tb);
            assert_eq!(s.xor(&a, &a).unwrap().as_const(), Some(false));
            let t = s.constant(true, &order);
            assert_eq!(s.and(&t, &b).unwrap(), b);
            for table in 0..16u8 {
                let op = BinOp::from_table(table);
                let r = s.apply(op, &a, &b).unwrap();
                s.check_reduced(&r).unwrap();
                let got = table_of(&s, &r, 6);
                for x in 0..64 {
                    assert_eq!(got[x], op.eval(ta[x], tb[x]));
                }
            }
        }
    }

    #[test]
    fn mismatched_orders_are_refused() {
        let mut s = Store::new();
        let a = s.var_in(0, &order_of([0, 1])).unwrap();
        let b = s.var_in(0, &order_of([1, 0])).unwrap();
        assert!(matches!(s.and(&a, &b), Err(Error::OrderMismatch(_))));
        assert!(s.compose(&a, 0, &b).is_err());
    }

    #[test]
    fn canonical_roots() {
        let mut s = Store::new();
        let order = order_of([0, 1, 2]);
        let x: Vec<Bdd> = (0..3).map(|v| s.var_in(v, &order).unwrap()).collect();
        // (x0 ^ x1) & x2 two ways
        let a = s.xor(&x[0], &x[1]).unwrap();
        let a = s.and(&a, &x[2]).unwrap();
        let b0 = s.and(&x[0], &x[2]).unwrap();
        let b1 = s.and(&x[1], &x[2]).unwrap();
        let b = s.xor(&b0, &b1).unwrap();
        assert_eq!(a.root(), b.root());
    }

    #[test]
    fn compose_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let order = order_of([2, 4, 0, 1, 5, 3]);
        for _ in 0..30 {
            let mut s = Store::new();
            let tf = random_fn(&mut rng, 6);
            let tg = random_fn(&mut rng, 6);
            let f = build(&mut s, &order, &tf);
            let g = build(&mut s, &order, &tg);
            let v = rng.gen_range(0..6u32);
            let r = s.compose(&f, v, &g).unwrap();
            s.check_reduced(&r).unwrap();
            let got = table_of(&s, &r, 6);
            for x in 0..64usize {
                let gv = tg[x];
                let y = (x & !(1 << v)) | (gv as usize) << v;
                assert_eq!(got[x], tf[y]);
            }
            let xv = s.var_in(v, &order).unwrap();
            assert_eq!(s.compose(&f, v, &xv).unwrap(), f);
            assert_eq!(s.compose(&xv, v, &g).unwrap(), g);
        }
    }

    #[test]
    fn vector_compose_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let from = order_of([3, 1, 0, 2]);
        let to = order_of([0, 4, 1, 3, 2]);
        for _ in 0..30 {
            let mut s = Store::new();
            let tf = random_fn(&mut rng, 5);
            let f = build(&mut s, &from, &tf);
            let images: Vec<Vec<bool>> = (0..2).map(|_| random_fn(&mut rng, 5)).collect();
            let mut subs = HashMap::new();
            subs.insert(1u32, build(&mut s, &to, &images[0]));
            subs.insert(2u32, build(&mut s, &to, &images[1]));
            let r = s.vector_compose(&f, &subs, &to).unwrap();
            s.check_reduced(&r).unwrap();
            let got = table_of(&s, &r, 5);
            for x in 0..32usize {
                let y = (x & !0b110) | (images[0][x] as usize) << 1 | (images[1][x] as usize) << 2;
                assert_eq!(got[x], tf[y & 0b1111]);
            }
        }
    }

    #[test]
    fn reorder_var_last_preserves_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let order = order_of([0, 1, 2, 3, 4, 5]);
        for _ in 0..30 {
            let mut s = Store::new();
            let tf = random_fn(&mut rng, 6);
            let f = build(&mut s, &order, &tf);
            let v = rng.gen_range(0..6u32);
            let r = s.reorder_var_last(&f, v);
            assert_eq!(*r.order().last().unwrap(), v);
            s.check_reduced(&r).unwrap();
            assert_eq!(table_of(&s, &r, 6), tf);
            // canonical in the new order
            let direct = build(&mut s, r.order(), &tf);
            assert_eq!(direct.root(), r.root());
        }
        let mut s = Store::new();
        let f = s.var_in(1, &order).unwrap();
        let g = s.reorder_var_last(&f, 3);
        assert_eq!(s.node_count(&g), s.node_count(&f));
        assert_eq!(s.reorder_var_last(&f, 5), f);
    }

    #[test]
    fn reorder_to_general_and_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let from = order_of([0, 1, 2, 3]);
        for _ in 0..30 {
            let mut s = Store::new();
            let tf = random_fn(&mut rng, 4);
            let mut table = vec![false; 64];
            for x in 0..64 {
                table[x] = tf[x & 15];
            }
            let f = build(&mut s, &from, &tf);
            for to in [order_of([5, 0, 1, 4, 2, 3]), order_of([3, 1, 5, 0, 2, 4])] {
                let r = s.reorder_to(&f, &to).unwrap();
                s.check_reduced(&r).unwrap();
                assert_eq!(table_of(&s, &r, 6), table);
                assert_eq!(build(&mut s, &to, &table).root(), r.root());
            }
        }
    }

    #[test]
    fn flip_and_swap_terminals() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let order = order_of([1, 3, 0, 2, 4]);
        for _ in 0..30 {
            let mut s = Store::new();
            let tf = random_fn(&mut rng, 5);
            let f = build(&mut s, &order, &tf);
            let v = rng.gen_range(0..5u32);
            let g = s.flip_var_branches(&f, v);
            assert_eq!(s.node_count(&g), s.node_count(&f));
            let got = table_of(&s, &g, 5);
            for x in 0..32 {
                assert_eq!(got[x], tf[x ^ (1 << v)]);
            }
            assert_eq!(s.flip_var_branches(&g, v), f);
            let n = s.swap_terminals(&f);
            assert_eq!(s.node_count(&n), s.node_count(&f));
            assert!(table_of(&s, &n, 5).iter().zip(&tf).all(|(a, b)| a != b));
            assert_eq!(s.swap_terminals(&n), f);
        }
        let mut s = Store::new();
        let v = s.bdd_var(2);
        let nv = s.flip_var_branches(&v, 2);
        assert_eq!(nv, s.swap_terminals(&v));
        let t = s.bdd_const(true);
        assert_eq!(s.swap_terminals(&t).as_const(), Some(false));
    }

    #[test]
    fn three_variable_functions_have_at_most_seven_internal_nodes() {
        let mut s = Store::new();
        let order = order_of([0, 1, 2]);
        let mut largest = 0;
        for t in 0..256u32 {
            let f = s.from_fn(&order, |x| t >> x & 1 == 1);
            let terminals = if f.as_const().is_some() { 1 } else { 2 };
            let internal = s.node_count(&f) - terminals;
            assert!(internal <= 7);
            largest = largest.max(s.node_count(&f));
        }
        // reduction merges enough that the largest diagram has 5 internal nodes
        assert_eq!(largest, 7);
    }

    #[test]
    fn pack_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let order = order_of([4, 2, 0, 1, 3]);
        let mut s = Store::new();
        let tf = random_fn(&mut rng, 5);
        let f = build(&mut s, &order, &tf);
        let p = s.pack(&f);
        assert_eq!(p.node_count(), s.node_count(&f));
        let mut s2 = Store::new();
        let g = s2.unpack(&p);
        assert_eq!(table_of(&s2, &g, 5), tf);
        assert_eq!(s2.pack(&g), p);
    }
}
