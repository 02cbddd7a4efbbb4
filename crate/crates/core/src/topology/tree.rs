use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical parenthesis encoding of a rooted tree: a vertex is `(` followed
/// by its children's codes in sorted order and `)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RootedTreeCode {
    pub code: String,
    pub vertex_count: usize,
}

impl RootedTreeCode {
    pub fn leaf() -> Self {
        RootedTreeCode {
            code: "()".into(),
            vertex_count: 1,
        }
    }

    /// Parses and canonicalizes any balanced parenthesis string.
    pub fn parse(s: &str) -> Result<Self> {
        Ok(canonical_code(&RootedTree::parse(s)?))
    }

    pub fn to_tree(&self) -> RootedTree {
        RootedTree::parse(&self.code).expect("canonical codes are well formed")
    }

    /// Number of children of the root.
    pub fn root_degree(&self) -> usize {
        self.to_tree().children[0].len()
    }

    /// Child subtree codes of the root, in canonical order.
    pub fn root_children(&self) -> Vec<RootedTreeCode> {
        let mut out = Vec::new();
        let bytes = self.code.as_bytes();
        let mut depth = 0usize;
        let mut start = 0usize;
        for (i, &b) in bytes.iter().enumerate().skip(1).take(bytes.len().saturating_sub(2)) {
            if b == b'(' {
                if depth == 0 {
                    start = i;
                }
                depth += 1;
            } else {
                depth -= 1;
                if depth == 0 {
                    let code = self.code[start..=i].to_string();
                    let vertex_count = code.len() / 2;
                    out.push(RootedTreeCode { code, vertex_count });
                }
            }
        }
        out
    }
}

impl std::fmt::Display for RootedTreeCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.code)
    }
}

/// Rooted tree as child lists; vertex 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    pub children: Vec<Vec<usize>>,
}

impl RootedTree {
    pub fn single() -> Self {
        RootedTree { children: vec![vec![]] }
    }

    pub fn from_parents(parents: &[Option<usize>]) -> Result<Self> {
        let mut children = vec![Vec::new(); parents.len()];
        for (v, p) in parents.iter().enumerate() {
            match (v, p) {
                (0, None) => {}
                (0, Some(_)) => return Err(Error::Malformed("vertex 0 must be the root".into())),
                (_, Some(p)) if *p < parents.len() && *p != v => children[*p].push(v),
                _ => return Err(Error::Malformed(format!("bad parent for vertex {v}"))),
            }
        }
        let t = RootedTree { children };
        if t.reachable() != parents.len() {
            return Err(Error::Malformed("parent array is not a tree".into()));
        }
        Ok(t)
    }

    fn reachable(&self) -> usize {
        let mut seen = vec![false; self.children.len()];
        let mut stack = vec![0];
        let mut count = 0;
        while let Some(v) = stack.pop() {
            if seen[v] {
                return usize::MAX;
            }
            seen[v] = true;
            count += 1;
            stack.extend(self.children[v].iter().copied());
        }
        count
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Malformed(format!("not a rooted tree code: {s:?}"));
        let mut children: Vec<Vec<usize>> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        let mut closed_root = false;
        for ch in s.chars() {
            match ch {
                '(' => {
                    if closed_root {
                        return Err(bad());
                    }
                    let v = children.len();
                    children.push(Vec::new());
                    if let Some(&p) = stack.last() {
                        children[p].push(v);
                    } else if v != 0 {
                        return Err(bad());
                    }
                    stack.push(v);
                }
                ')' => {
                    stack.pop().ok_or_else(bad)?;
                    if stack.is_empty() {
                        closed_root = true;
                    }
                }
                _ => return Err(bad()),
            }
        }
        if !closed_root || !stack.is_empty() {
            return Err(bad());
        }
        Ok(RootedTree { children })
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }
}

/// AHU canonical form, computed without recursion.
pub fn canonical_code(tree: &RootedTree) -> RootedTreeCode {
    let n = tree.children.len();
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        order.push(v);
        stack.extend(tree.children[v].iter().copied());
    }
    let mut codes: Vec<String> = vec![String::new(); n];
    for &v in order.iter().rev() {
        let mut kids: Vec<String> = tree.children[v].iter().map(|&c| std::mem::take(&mut codes[c])).collect();
        kids.sort_unstable();
        let mut s = String::with_capacity(2 + kids.iter().map(String::len).sum::<usize>());
        s.push('(');
        for k in kids {
            s.push_str(&k);
        }
        s.push(')');
        codes[v] = s;
    }
    RootedTreeCode {
        code: std::mem::take(&mut codes[0]),
        vertex_count: n,
    }
}

/// All non-isomorphic rooted trees with exactly `n` vertices, as sorted codes.
pub fn enumerate_rooted_trees(n: usize) -> Vec<RootedTreeCode> {
    let mut by_size: Vec<Vec<String>> = vec![Vec::new(); n + 1];
    for size in 1..=n {
        let mut found = BTreeSet::new();
        let mut parts = Vec::new();
        forests(size - 1, (usize::MAX, 0), &by_size, &mut parts, &mut found);
        by_size[size] = found.into_iter().collect();
    }
    by_size[n]
        .iter()
        .map(|c| RootedTreeCode {
            code: c.clone(),
            vertex_count: n,
        })
        .collect()
}

/// Multisets of subtrees with total size `remaining`, each no larger (in
/// (size, index) order) than `bound`, so every multiset is produced once.
fn forests(
    remaining: usize,
    bound: (usize, usize),
    by_size: &[Vec<String>],
    parts: &mut Vec<String>,
    found: &mut BTreeSet<String>,
) {
    if remaining == 0 {
        let mut kids = parts.clone();
        kids.sort_unstable();
        found.insert(format!("({})", kids.concat()));
        return;
    }
    for size in (1..=remaining.min(bound.0)).rev() {
        let limit = if size == bound.0 { bound.1 + 1 } else { by_size[size].len() };
        for idx in 0..limit.min(by_size[size].len()) {
            parts.push(by_size[size][idx].clone());
            forests(remaining - size, (size, idx), by_size, parts, found);
            parts.pop();
        }
    }
}

/// Random recursive tree: vertex `v` attaches to a uniform earlier vertex.
pub fn random_rooted_tree<R: Rng>(n: usize, rng: &mut R) -> RootedTree {
    let parents: Vec<Option<usize>> = (0..n.max(1))
        .map(|v| if v == 0 { None } else { Some(rng.random_range(0..v)) })
        .collect();
    RootedTree::from_parents(&parents).expect("attachment to earlier vertices forms a tree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn basic_codes() {
        assert_eq!(canonical_code(&RootedTree::single()).code, "()");
        let a = RootedTree::from_parents(&[None, Some(0), Some(0), Some(1)]).unwrap();
        let b = RootedTree::from_parents(&[None, Some(0), Some(0), Some(2)]).unwrap();
        assert_eq!(canonical_code(&a), canonical_code(&b));
        let path = RootedTree::from_parents(&[None, Some(0), Some(1)]).unwrap();
        let star = RootedTree::from_parents(&[None, Some(0), Some(0)]).unwrap();
        assert_eq!(canonical_code(&path).code, "((()))");
        assert_eq!(canonical_code(&star).code, "(()())");
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let c = RootedTreeCode::parse("(()(()))").unwrap();
        assert_eq!(c.code, "((())())");
        assert_eq!(c.vertex_count, 4);
        assert_eq!(c.root_degree(), 2);
        let kids: Vec<String> = c.root_children().into_iter().map(|k| k.code).collect();
        assert_eq!(kids, vec!["(())", "()"]);
        for bad in ["", "(", ")(", "()()", "(x)", "(()"] {
            assert!(RootedTreeCode::parse(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn counts_match_known_sequence() {
        // number of rooted unlabeled trees: 1, 1, 2, 4, 9, 20, 48, 115
        let want = [1, 1, 2, 4, 9, 20, 48, 115];
        for (i, &w) in want.iter().enumerate() {
            let trees = enumerate_rooted_trees(i + 1);
            assert_eq!(trees.len(), w, "n = {}", i + 1);
            for t in &trees {
                assert_eq!(RootedTreeCode::parse(&t.code).unwrap(), *t);
            }
        }
    }

    #[test]
    fn deep_path_does_not_overflow() {
        let parents: Vec<Option<usize>> = (0..100_000).map(|v| if v == 0 { None } else { Some(v - 1) }).collect();
        let c = canonical_code(&RootedTree::from_parents(&parents).unwrap());
        assert_eq!(c.vertex_count, 100_000);
    }

    fn relabel(tree: &RootedTree, perm_seed: u64) -> RootedTree {
        // random relabeling of non-root vertices and shuffled child order
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed);
        let n = tree.len();
        let mut perm: Vec<usize> = (1..n).collect();
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let map = |v: usize| if v == 0 { 0 } else { perm[v - 1] };
        let mut children = vec![Vec::new(); n];
        for (v, kids) in tree.children.iter().enumerate() {
            let mut k: Vec<usize> = kids.iter().map(|&c| map(c)).collect();
            k.reverse();
            children[map(v)] = k;
        }
        RootedTree { children }
    }

    proptest! {
        #[test]
        fn code_invariant_under_relabeling(n in 1usize..30, seed in any::<u64>(), perm in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let t = random_rooted_tree(n, &mut rng);
            let c = canonical_code(&t);
            prop_assert_eq!(c.vertex_count, n);
            prop_assert_eq!(&canonical_code(&relabel(&t, perm)), &c);
            prop_assert_eq!(RootedTreeCode::parse(&c.code).unwrap(), c);
        }
    }
}
