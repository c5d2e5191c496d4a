//! Nearest-neighbour search over object point clouds and grasp-to-part assignment.

use crate::data::{LabeledGrasp, PartLabeledObject, Point3};
use crate::error::{CageError, Result};

#[inline]
fn dist2(a: &Point3, b: &Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Static, balanced 3-d tree. Nodes are stored implicitly: the median of every
/// sorted sub-range is the node, the halves on either side are its children.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point3>,
    /// Original index of each entry of `points`.
    ids: Vec<usize>,
}

impl KdTree {
    pub fn build(points: &[Point3]) -> Result<Self> {
        Self::build_with_ids(points.iter().copied().enumerate())
    }

    /// Builds a tree over `(original index, point)` pairs.
    pub fn build_with_ids(entries: impl IntoIterator<Item = (usize, Point3)>) -> Result<Self> {
        let mut entries: Vec<(usize, Point3)> = entries.into_iter().collect();
        if entries.is_empty() {
            return Err(CageError::Geometry("cannot build a kd-tree over zero points".into()));
        }
        if entries.iter().any(|(_, p)| p.iter().any(|c| !c.is_finite())) {
            return Err(CageError::Geometry("non-finite point coordinate".into()));
        }
        let n = entries.len();
        split(&mut entries, 0);
        let (ids, points) = entries.into_iter().unzip();
        debug_assert_eq!(n, Vec::len(&ids));
        Ok(KdTree { points, ids })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nearest stored point as `(original index, Euclidean distance)`.
    /// Equidistant points resolve to the lowest original index.
    pub fn nearest(&self, query: &Point3) -> Result<(usize, f64)> {
        if query.iter().any(|c| !c.is_finite()) {
            return Err(CageError::Geometry("non-finite query".into()));
        }
        let mut best = Best {
            id: usize::MAX,
            d2: f64::INFINITY,
        };
        self.search(0, self.points.len(), 0, query, &mut best);
        Ok((best.id, best.d2.sqrt()))
    }

    fn search(&self, lo: usize, hi: usize, depth: usize, q: &Point3, best: &mut Best) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let axis = depth % 3;
        let node = &self.points[mid];
        best.offer(self.ids[mid], dist2(node, q));

        let diff = q[axis] - node[axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(near.0, near.1, depth + 1, q, best);
        if diff * diff <= best.d2 {
            self.search(far.0, far.1, depth + 1, q, best);
        }
    }
}

struct Best {
    id: usize,
    d2: f64,
}

impl Best {
    fn offer(&mut self, id: usize, d2: f64) {
        if d2 < self.d2 || (d2 == self.d2 && id < self.id) {
            self.id = id;
            self.d2 = d2;
        }
    }
}

fn split(entries: &mut [(usize, Point3)], depth: usize) {
    if entries.len() <= 1 {
        return;
    }
    let axis = depth % 3;
    entries.sort_by(|a, b| a.1[axis].total_cmp(&b.1[axis]).then(a.0.cmp(&b.0)));
    let mid = entries.len() / 2;
    let (left, right) = entries.split_at_mut(mid);
    split(left, depth + 1);
    split(&mut right[1..], depth + 1);
}

pub fn build_kdtree(points: &[Point3]) -> Result<KdTree> {
    KdTree::build(points)
}

pub fn nearest_point(tree: &KdTree, query: &Point3) -> Result<(usize, f64)> {
    tree.nearest(query)
}

/// Maps grasp centres to the part owning the closest point of an object's cloud.
#[derive(Debug, Clone)]
pub struct PartLocator {
    tree: KdTree,
    owners: Vec<Option<usize>>,
}

impl PartLocator {
    pub fn new(object: &PartLabeledObject) -> Result<Self> {
        let owners = object.point_owners();
        // only points that belong to a part are candidates
        let tree = KdTree::build_with_ids(
            object
                .points
                .iter()
                .enumerate()
                .filter(|(i, _)| owners[*i].is_some())
                .map(|(i, p)| (i, *p)),
        )?;
        Ok(PartLocator { tree, owners })
    }

    pub fn part_at(&self, position: &Point3) -> Result<usize> {
        let (point, _) = self.tree.nearest(position)?;
        Ok(self.owners[point].expect("tree holds owned points only"))
    }
}

/// Part of `object` the grasp is assigned to: the owner of the point nearest
/// the grasp centre. Orientation is not used.
pub fn assign_grasp_to_part(object: &PartLabeledObject, grasp: &LabeledGrasp) -> Result<usize> {
    PartLocator::new(object)?.part_at(&grasp.position)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{GraspLabel, Part};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear_scan(points: &[Point3], q: &Point3) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, p) in points.iter().enumerate() {
            let d = dist2(p, q);
            if d < best.1 {
                best = (i, d);
            }
        }
        (best.0, best.1.sqrt())
    }

    #[test]
    fn single_point() {
        let t = build_kdtree(&[[1.0, 2.0, 3.0]]).unwrap();
        for q in [[0.0, 0.0, 0.0], [1.0, 2.0, 3.0], [-5.0, 9.0, 1.0]] {
            assert_eq!(t.nearest(&q).unwrap().0, 0);
        }
    }

    #[test]
    fn two_point_examples() {
        let t = build_kdtree(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        let (i, d) = t.nearest(&[0.1, 0.0, 0.0]).unwrap();
        assert_eq!(i, 0);
        assert!((d - 0.1).abs() < 1e-15);
        assert_eq!(t.nearest(&[1.0, 0.0, 0.0]).unwrap(), (1, 0.0));
        assert_eq!(t.nearest(&[0.5, 0.0, 0.0]).unwrap(), (0, 0.5));
    }

    #[test]
    fn duplicates_resolve_to_lowest_index() {
        let pts = [[1.0, 1.0, 1.0], [0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0]];
        let t = build_kdtree(&pts).unwrap();
        assert_eq!(t.nearest(&[1.0, 1.0, 1.0]).unwrap(), (0, 0.0));
    }

    #[test]
    fn errors() {
        assert!(build_kdtree(&[]).is_err());
        assert!(build_kdtree(&[[f64::NAN, 0.0, 0.0]]).is_err());
        let t = build_kdtree(&[[0.0; 3]]).unwrap();
        assert!(t.nearest(&[0.0, f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn thousand_random_points_match_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point3> = (0..1000).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect();
        let t = build_kdtree(&pts).unwrap();
        for _ in 0..2000 {
            let q: Point3 = std::array::from_fn(|_| rng.random_range(-1.2..1.2));
            assert_eq!(t.nearest(&q).unwrap(), linear_scan(&pts, &q));
        }
        for p in &pts {
            assert_eq!(t.nearest(p).unwrap().1, 0.0);
        }
    }

    #[test]
    fn grid_ties_match_scan() {
        // lattice points produce many exact ties
        let pts: Vec<Point3> = (0..125)
            .map(|i| [(i % 5) as f64, ((i / 5) % 5) as f64, (i / 25) as f64])
            .collect();
        let t = build_kdtree(&pts).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let q = [i as f64 * 0.5, j as f64 * 0.5, 2.5];
                assert_eq!(t.nearest(&q).unwrap(), linear_scan(&pts, &q));
            }
        }
    }

    proptest! {
        #[test]
        fn nearest_equals_linear_scan(
            pts in prop::collection::vec(prop::array::uniform3(-10i32..10), 1..80),
            q in prop::array::uniform3(-12i32..12),
        ) {
            let pts: Vec<Point3> = pts.iter().map(|p| p.map(|c| c as f64 * 0.25)).collect();
            let q = q.map(|c| c as f64 * 0.25);
            let t = build_kdtree(&pts).unwrap();
            prop_assert_eq!(t.nearest(&q).unwrap(), linear_scan(&pts, &q));
        }
    }

    fn two_part_object() -> PartLabeledObject {
        PartLabeledObject {
            object_id: "o".into(),
            object_class: "cup".into(),
            points: vec![[0.0, 0.0, 0.0], [0.0, 0.0, 0.02], [0.1, 0.0, 0.0], [0.1, 0.0, 0.02]],
            parts: vec![
                Part {
                    affordance: "grasp".into(),
                    material: "wood".into(),
                    point_indices: vec![2, 3],
                },
                Part {
                    affordance: "contain".into(),
                    material: "metal".into(),
                    point_indices: vec![0, 1],
                },
            ],
        }
    }

    fn grasp_at(position: Point3) -> LabeledGrasp {
        LabeledGrasp {
            position,
            orientation: [1.0, 0.0, 0.0, 0.0],
            label: GraspLabel::Neutral,
        }
    }

    #[test]
    fn grasp_inside_handle_cluster() {
        let o = two_part_object();
        assert_eq!(assign_grasp_to_part(&o, &grasp_at([0.1, 0.0, 0.01])).unwrap(), 0);
        assert_eq!(assign_grasp_to_part(&o, &grasp_at([0.0, 0.001, 0.01])).unwrap(), 1);
    }

    #[test]
    fn equidistant_grasp_takes_lower_point_index() {
        let o = two_part_object();
        // points 0 and 2 are equidistant; point 0 belongs to part 1
        assert_eq!(assign_grasp_to_part(&o, &grasp_at([0.05, 0.0, 0.0])).unwrap(), 1);
    }

    #[test]
    fn random_grasps_match_scan_assignment() {
        use crate::data::{generate_synthetic, GeneratorConfig};
        let s = generate_synthetic(
            &GeneratorConfig {
                objects_per_class: 2,
                ..GeneratorConfig::default()
            },
            21,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k in 0..500 {
            let o = &s.dataset.objects[k % s.dataset.objects.len()];
            let owners = o.point_owners();
            let anchor = o.points[rng.random_range(0..o.points.len())];
            let pos = anchor.map(|c| c + rng.random_range(-0.02..0.02));
            let expected = owners[linear_scan(&o.points, &pos).0].unwrap();
            assert_eq!(assign_grasp_to_part(o, &grasp_at(pos)).unwrap(), expected);
        }
    }
}
