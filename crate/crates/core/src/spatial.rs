//! Exact nearest-neighbour search over 3D points with a median-split k-d tree.

use thiserror::Error;

use crate::mesh::Vec3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpatialError {
    #[error("cannot index an empty point set")]
    Empty,
    #[error("leaf size must be positive")]
    LeafSize,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Immutable k-d tree. Leaves hold ranges of a permutation of point indices.
#[derive(Debug, Clone)]
pub struct KdIndex {
    points: Vec<Vec3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
    leaf_size: usize,
}

impl KdIndex {
    /// Splits at the median of the widest-spread axis (lowest axis on ties).
    /// Median ties are ordered by point index, so the tree is a pure function
    /// of the input order.
    pub fn build(points: &[Vec3], leaf_size: usize) -> Result<Self, SpatialError> {
        if points.is_empty() {
            return Err(SpatialError::Empty);
        }
        if leaf_size == 0 {
            return Err(SpatialError::LeafSize);
        }
        let mut index = Self {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
            leaf_size,
        };
        index.build_node(0, points.len());
        Ok(index)
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= self.leaf_size {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            for k in 0..3 {
                lo[k] = lo[k].min(self.points[i][k]);
                hi[k] = hi[k].max(self.points[i][k]);
            }
        }
        let mut axis = 0;
        for k in 1..3 {
            if hi[k] - lo[k] > hi[axis] - lo[axis] {
                axis = k;
            }
        }
        let mid = start + (end - start) / 2;
        let pts = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            pts[a][axis].total_cmp(&pts[b][axis]).then(a.cmp(&b))
        });
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Number of nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 1,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Point index ranges of all leaves, in tree order.
    pub fn leaves(&self) -> Vec<&[usize]> {
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Leaf { start, end } => Some(&self.order[start..end]),
                Node::Split { .. } => None,
            })
            .collect()
    }

    /// Exact nearest point and its Euclidean distance; equal distances resolve
    /// to the lowest point index.
    pub fn nearest(&self, query: &Vec3) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(0, query, &mut best);
        (best.0, best.1.sqrt())
    }

    fn search(&self, id: usize, q: &Vec3, best: &mut (usize, f64)) {
        match self.nodes[id] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d = (self.points[i] - q).norm_squared();
                    if d < best.1 || (d == best.1 && i < best.0) {
                        *best = (i, d);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, best);
                // `<=` keeps equidistant candidates reachable for the index tie rule
                if diff * diff <= best.1 {
                    self.search(far, q, best);
                }
            }
        }
    }
}
