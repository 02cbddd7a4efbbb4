//! Sign patterns on the crossings of the checkerboard `sin(pi x) sin(pi y)`.
//!
//! Squares `[i, i+1] x [j, j+1]` are addressed in rotated doubled coordinates
//! `(p, q) = (i + j, j - i)`, so squares sit at points with `p = q (mod 2)` and
//! have sign `(-1)^p`. The crossing at lattice point `(a, b)` is the point
//! `(a + b - 1, b - a)`, of mixed parity; it joins either its two horizontal
//! neighbours or its two vertical neighbours, whichever pair has the sign of
//! the perturbation there. Even squares form one square lattice, odd squares
//! its dual, and a crossing is a bond of exactly one of them.
//!
//! A figure is a rectangle whose corners all have the parity of its root
//! squares. The root domain is the rectangle's border, joined into a ring;
//! the crossings just outside the border join the other parity, which closes
//! the root from outside.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::topology::RootedTreeCode;

type Pt = (i32, i32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Rect {
    x0: i32,
    x1: i32,
    y0: i32,
    y1: i32,
}

impl Rect {
    fn contains(&self, p: Pt) -> bool {
        p.0 >= self.x0 && p.0 <= self.x1 && p.1 >= self.y0 && p.1 <= self.y1
    }

    fn on_border(&self, p: Pt) -> bool {
        self.contains(p) && (p.0 == self.x0 || p.0 == self.x1 || p.1 == self.y0 || p.1 == self.y1)
    }

    fn shifted(&self, dx: i32, dy: i32) -> Rect {
        Rect {
            x0: self.x0 + dx,
            x1: self.x1 + dx,
            y0: self.y0 + dy,
            y1: self.y1 + dy,
        }
    }

    fn border_sites(&self) -> Vec<Pt> {
        let mut out = Vec::new();
        for y in (self.y0..=self.y1).step_by(2) {
            for x in (self.x0..=self.x1).step_by(2) {
                if self.on_border((x, y)) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Crossings one step outside the border, adjacent to border squares.
    fn closing_crossings(&self) -> Vec<Pt> {
        let mut out = Vec::new();
        for y in (self.y0..=self.y1).step_by(2) {
            out.push((self.x0 - 1, y));
            out.push((self.x1 + 1, y));
        }
        for x in (self.x0..=self.x1).step_by(2) {
            out.push((x, self.y0 - 1));
            out.push((x, self.y1 + 1));
        }
        out
    }
}

fn parity(v: i32) -> u8 {
    v.rem_euclid(2) as u8
}

/// Sign assignment on a finite set of crossings of the checkerboard.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSignPattern {
    /// Lattice points `(a, b)` in the checkerboard's own coordinates.
    pub points: Vec<[i32; 2]>,
    /// Sign prescribed for the perturbation at each point.
    pub eta: Vec<i8>,
    /// `[[a_min, b_min], [a_max, b_max]]`.
    pub bounding_box: [[i32; 2]; 2],
    /// Parity of the top-level figures' root squares (0 is positive).
    root_parity: u8,
    /// Top-level figures, in placement order.
    figures: Vec<Rect>,
    /// Crossing -> parity of the squares it joins.
    joins: BTreeMap<Pt, u8>,
}

impl LatticeSignPattern {
    /// Pattern given directly by points and signs. It has no figure structure,
    /// so [`engulf`] and [`join`] reject it.
    pub fn from_points(points: Vec<[i32; 2]>, eta: Vec<i8>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Precondition("pattern needs at least one point".into()));
        }
        if points.len() != eta.len() || eta.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::Precondition("eta must assign +1 or -1 to every point".into()));
        }
        let bounding_box = bbox(&points);
        Ok(LatticeSignPattern {
            points,
            eta,
            bounding_box,
            root_parity: 0,
            figures: Vec::new(),
            joins: BTreeMap::new(),
        })
    }

    /// A single positive square isolated from all its diagonal neighbours.
    pub fn trivial() -> Self {
        let r = Rect { x0: 0, x1: 0, y0: 0, y1: 0 };
        let mut joins = BTreeMap::new();
        for c in r.closing_crossings() {
            joins.insert(c, 1);
        }
        Self::from_parts(0, vec![r], joins)
    }

    fn from_parts(root_parity: u8, figures: Vec<Rect>, joins: BTreeMap<Pt, u8>) -> Self {
        let mut points = Vec::with_capacity(joins.len());
        let mut eta = Vec::with_capacity(joins.len());
        for (&(p, q), &t) in &joins {
            points.push([(p - q + 1) / 2, (p + q + 1) / 2]);
            eta.push(if t == 0 { 1 } else { -1 });
        }
        let bounding_box = bbox(&points);
        LatticeSignPattern {
            points,
            eta,
            bounding_box,
            root_parity,
            figures,
            joins,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn figure_count(&self) -> usize {
        self.figures.len()
    }

    /// Sign of the root domain of the top-level figures.
    pub fn root_sign(&self) -> i8 {
        if self.root_parity == 0 {
            1
        } else {
            -1
        }
    }

    /// Centre of a square on the root ring of top-level figure `k`, in the
    /// checkerboard's coordinates.
    pub fn root_square_centre(&self, k: usize) -> Option<[f64; 2]> {
        let r = self.figures.get(k)?;
        let (i, j) = ((r.x0 - r.y0) / 2, (r.x0 + r.y0) / 2);
        Some([i as f64 + 0.5, j as f64 + 0.5])
    }

    /// Moves every square one step up, which swaps the parity of all squares
    /// and negates every sign.
    fn flipped(&self) -> Self {
        let joins = self.joins.iter().map(|(&(p, q), &t)| ((p + 1, q + 1), 1 - t)).collect();
        let figures = self.figures.iter().map(|r| r.shifted(1, 1)).collect();
        Self::from_parts(1 - self.root_parity, figures, joins)
    }

    fn hull(&self) -> Rect {
        let mut h = self.figures[0];
        for r in &self.figures[1..] {
            h.x0 = h.x0.min(r.x0);
            h.x1 = h.x1.max(r.x1);
            h.y0 = h.y0.min(r.y0);
            h.y1 = h.y1.max(r.y1);
        }
        h
    }

    fn require_figures(&self, op: &str) -> Result<()> {
        if self.figures.is_empty() {
            return Err(Error::Precondition(format!("{op} needs a pattern built from figures")));
        }
        Ok(())
    }
}

fn bbox(points: &[[i32; 2]]) -> [[i32; 2]; 2] {
    let mut lo = [i32::MAX; 2];
    let mut hi = [i32::MIN; 2];
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    [lo, hi]
}

fn insert(joins: &mut BTreeMap<Pt, u8>, c: Pt, t: u8) -> Result<()> {
    match joins.insert(c, t) {
        Some(old) if old != t => Err(Error::Invariant(format!("conflicting signs at crossing {c:?}"))),
        _ => Ok(()),
    }
}

/// Encloses all top-level figures in one new ring of the opposite sign, whose
/// leftover squares are absorbed by tree-like arms grown from the enclosed
/// figures.
pub fn engulf(pattern: &LatticeSignPattern) -> Result<LatticeSignPattern> {
    pattern.require_figures("engulf")?;
    let inner = pattern.root_parity;
    let outer = 1 - inner;
    let h = pattern.hull();
    let ring = Rect {
        x0: h.x0 - 1,
        x1: h.x1 + 1,
        y0: h.y0 - 1,
        y1: h.y1 + 1,
    };
    let mut joins = pattern.joins.clone();
    // ring bonds
    for y in (ring.y0..ring.y1).step_by(2) {
        insert(&mut joins, (ring.x0, y + 1), outer)?;
        insert(&mut joins, (ring.x1, y + 1), outer)?;
    }
    for x in (ring.x0..ring.x1).step_by(2) {
        insert(&mut joins, (x + 1, ring.y0), outer)?;
        insert(&mut joins, (x + 1, ring.y1), outer)?;
    }
    // inner-parity squares left between the figures and the ring
    let inside = |p: Pt| p.0 > ring.x0 && p.0 < ring.x1 && p.1 > ring.y0 && p.1 < ring.y1;
    let in_figure = |p: Pt| pattern.figures.iter().any(|r| r.contains(p));
    // a child's closing crossing may be turned into an arm when a square is
    // wedged between children and the ring
    let closing: BTreeSet<Pt> = pattern.figures.iter().flat_map(|r| r.closing_crossings()).collect();
    let mut absorbed: BTreeSet<Pt> = BTreeSet::new();
    let mut queue: VecDeque<Pt> = pattern.figures.iter().flat_map(|r| r.border_sites()).collect();
    while let Some(s) = queue.pop_front() {
        for d in [(1, 0), (0, 1), (-1, 0), (0, -1)] {
            let c = (s.0 + d.0, s.1 + d.1);
            let n = (s.0 + 2 * d.0, s.1 + 2 * d.1);
            if !inside(n) || in_figure(n) || absorbed.contains(&n) {
                continue;
            }
            if joins.contains_key(&c) && !closing.contains(&c) {
                continue;
            }
            joins.insert(c, inner);
            absorbed.insert(n);
            queue.push_back(n);
        }
    }
    for y in ring.y0 + 1..ring.y1 {
        for x in ring.x0 + 1..ring.x1 {
            let p = (x, y);
            if parity(x) == parity(y) {
                if parity(x) == inner && !in_figure(p) && !absorbed.contains(&p) {
                    return Err(Error::Invariant(format!("square {p:?} left isolated inside the ring")));
                }
            } else {
                joins.entry(p).or_insert(outer);
            }
        }
    }
    for c in ring.closing_crossings() {
        insert(&mut joins, c, inner)?;
    }
    Ok(LatticeSignPattern::from_parts(outer, vec![ring], joins))
}

/// Places `b` to the right of `a`, bottoms aligned, with one column of the
/// opposite parity between them. The result has the figures of both; a
/// following [`engulf`] makes them siblings.
pub fn join(a: &LatticeSignPattern, b: &LatticeSignPattern) -> Result<LatticeSignPattern> {
    a.require_figures("join")?;
    b.require_figures("join")?;
    let b = if b.root_parity == a.root_parity { b.clone() } else { b.flipped() };
    let (ha, hb) = (a.hull(), b.hull());
    let dx = ha.x1 + 2 - hb.x0;
    let dy = ha.y0 - hb.y0;
    debug_assert!(dx % 2 == 0 && dy % 2 == 0);
    let mut figures = a.figures.clone();
    let mut joins = a.joins.clone();
    for r in &b.figures {
        let r = r.shifted(dx, dy);
        if figures.iter().any(|f| f.x0 <= r.x1 && r.x0 <= f.x1 && f.y0 <= r.y1 && r.y0 <= f.y1) {
            return Err(Error::Invariant("joined figures overlap".into()));
        }
        figures.push(r);
    }
    for (&(p, q), &t) in &b.joins {
        insert(&mut joins, (p + dx, q + dy), t)?;
    }
    Ok(LatticeSignPattern::from_parts(a.root_parity, figures, joins))
}

/// Pattern whose outer curve bounds a path with `k` vertices.
pub fn grow_chain(k: usize) -> Result<LatticeSignPattern> {
    if k == 0 {
        return Err(Error::Precondition("chain length must be at least 1".into()));
    }
    let mut p = LatticeSignPattern::trivial();
    for _ in 1..k {
        p = engulf(&p)?;
    }
    Ok(p)
}

/// Leaf to the trivial pattern; an internal vertex to the engulfed join of
/// its children's patterns.
pub fn pattern_for_tree(tree: &RootedTreeCode) -> Result<LatticeSignPattern> {
    let children = tree.root_children();
    if children.is_empty() {
        return Ok(LatticeSignPattern::trivial());
    }
    let mut acc: Option<LatticeSignPattern> = None;
    for c in &children {
        let p = pattern_for_tree(c)?;
        acc = Some(match acc {
            None => p,
            Some(a) => join(&a, &p)?,
        });
    }
    engulf(&acc.expect("at least one child"))
}
