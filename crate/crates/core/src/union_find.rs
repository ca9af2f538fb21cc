//! Disjoint sets whose representative is always the smallest member, so the
//! resulting partition does not depend on the order unions are applied in.

#[derive(Clone, Debug)]
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Members grouped by representative, groups ordered by smallest member.
    pub(crate) fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = self.find(i);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(i);
        }
        groups
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representative_is_smallest() {
        let mut d = DisjointSet::new(6);
        d.union(5, 3);
        d.union(3, 4);
        d.union(2, 0);
        assert_eq!(d.find(4), 3);
        assert_eq!(d.find(2), 0);
        assert_eq!(d.groups(), vec![vec![0, 2], vec![1], vec![3, 4, 5]]);
    }

    #[test]
    fn order_independent() {
        let edges = [(0, 4), (4, 2), (1, 3), (5, 5)];
        let mut a = DisjointSet::new(6);
        let mut b = DisjointSet::new(6);
        for &(x, y) in &edges {
            a.union(x, y);
        }
        for &(x, y) in edges.iter().rev() {
            b.union(y, x);
        }
        assert_eq!(a.groups(), b.groups());
    }
}
