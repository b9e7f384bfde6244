use crate::net::{Net, NetError, Pair};

/// A label-matched pair of transitions and the product nodes it connects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductEdge {
    pub from: usize,
    pub to: usize,
    pub left: usize,
    pub right: usize,
}

/// Synchronised product of a Spoiler net and a Duplicator net.
#[derive(Debug, Clone)]
pub struct ProductGraph {
    right_states: usize,
    nodes: usize,
    edges: Vec<ProductEdge>,
    out: Vec<Vec<usize>>,
}

impl ProductGraph {
    pub fn node(&self, pair: Pair) -> usize {
        pair.0 * self.right_states + pair.1
    }

    pub fn pair(&self, node: usize) -> Pair {
        (node / self.right_states, node % self.right_states)
    }

    /// K, the number of nodes.
    pub fn size(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[ProductEdge] {
        &self.edges
    }

    pub fn out(&self, node: usize) -> impl Iterator<Item = &ProductEdge> {
        self.out[node].iter().map(|&e| &self.edges[e])
    }
}

/// Actions are matched by name so the nets need not share ids.
pub fn product_graph(lhs: &Net, rhs: &Net) -> ProductGraph {
    let right_states = rhs.num_states().max(1);
    let nodes = lhs.num_states() * rhs.num_states();
    let label_map: Vec<Option<usize>> = lhs.actions().iter().map(|a| rhs.action_id(a)).collect();
    let mut edges = Vec::new();
    let mut out = vec![Vec::new(); nodes];
    for (li, lt) in lhs.transitions().iter().enumerate() {
        let Some(label) = label_map[lt.label] else { continue };
        for (ri, rt) in rhs.transitions().iter().enumerate() {
            if rt.label != label {
                continue;
            }
            let from = lt.src * right_states + rt.src;
            let to = lt.dst * right_states + rt.dst;
            out[from].push(edges.len());
            edges.push(ProductEdge { from, to, left: li, right: ri });
        }
    }
    ProductGraph { right_states, nodes, edges, out }
}

/// Splits a lasso into its acyclic prefix and closing cycle.
pub fn lasso_split<T: PartialEq + Clone>(path: &[T]) -> Result<(Vec<T>, Vec<T>), NetError> {
    let Some((last, body)) = path.split_last() else { return Err(NetError::NotALasso) };
    for (i, x) in body.iter().enumerate() {
        if body[..i].contains(x) {
            return Err(NetError::NotALasso);
        }
    }
    let at = body.iter().position(|x| x == last).ok_or(NetError::NotALasso)?;
    Ok((path[..=at].to_vec(), path[at..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_product() {
        let n = Net::ocn("ex2", &[("p", "a", -1, "p"), ("p", "tau", 1, "p")]).unwrap();
        let g = product_graph(&n, &n);
        assert_eq!(g.size(), 1);
        assert_eq!(g.edges().len(), 2);
    }

    #[test]
    fn drain_product() {
        let a = Net::ocn("A", &[("A", "a", 0, "A")]).unwrap();
        let b = Net::ocn("BC", &[("B", "tau", 1, "B"), ("B", "a", 0, "C"), ("C", "a", -1, "C")]).unwrap();
        let g = product_graph(&a, &b);
        assert_eq!(g.size(), 2);
        let ab = g.node((0, 0));
        let ac = g.node((0, 1));
        let mut got: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.from, e.to)).collect();
        got.sort();
        assert_eq!(got, vec![(ab, ac), (ac, ac)]);
    }

    #[test]
    fn disjoint_alphabets() {
        let a = Net::ocn("A", &[("A", "a", 0, "A")]).unwrap();
        let b = Net::ocn("B", &[("B", "b", 0, "B")]).unwrap();
        assert!(product_graph(&a, &b).edges().is_empty());
    }

    #[test]
    fn lassos() {
        assert_eq!(lasso_split(&['u', 'v', 'u']).unwrap(), (vec!['u'], vec!['u', 'v', 'u']));
        assert_eq!(lasso_split(&['u', 'v', 'v']).unwrap(), (vec!['u', 'v'], vec!['v', 'v']));
        assert_eq!(lasso_split(&['u', 'v']), Err(NetError::NotALasso));
        assert_eq!(lasso_split(&['u', 'u', 'v', 'u']), Err(NetError::NotALasso));
    }
}
