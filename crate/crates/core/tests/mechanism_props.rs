use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wirearr::mechanism::{
    anchor_world_positions, decode_genome, muscle_jacobian, wire_lengths, DesignParams, Genome, JointAngles,
    MechanismConfig,
};

fn config(dofs: usize, wires: usize, points: usize) -> MechanismConfig {
    MechanismConfig::new(0.2, 0.2, MechanismConfig::standard_joints(dofs), wires, points, 0.0).unwrap()
}

fn random_design(cfg: &MechanismConfig, rng: &mut ChaCha8Rng) -> DesignParams {
    let g = Genome((0..cfg.genome_length()).map(|_| rng.random_range(-1.0..=1.0)).collect());
    decode_genome(&g, cfg).unwrap()
}

fn random_angles(dofs: usize, limit_deg: f64, rng: &mut ChaCha8Rng) -> JointAngles {
    JointAngles((0..dofs).map(|_| rng.random_range(-limit_deg..=limit_deg).to_radians()).collect())
}

type Mat4 = [[f64; 4]; 4];

fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn translate(z: f64) -> Mat4 {
    [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, z], [0.0, 0.0, 0.0, 1.0]]
}

fn rot(axis: usize, a: f64) -> Mat4 {
    let (s, c) = a.sin_cos();
    let (i, j) = match axis {
        0 => (1, 2),
        1 => (2, 0),
        _ => (0, 1),
    };
    let mut m = [[0.0; 4]; 4];
    for (k, row) in m.iter_mut().enumerate() {
        row[k] = 1.0;
    }
    m[i][i] = c;
    m[j][j] = c;
    m[i][j] = -s;
    m[j][i] = s;
    m
}

/// Moving-disc anchor via an explicit chain of homogeneous transforms about the joint.
fn homogeneous_anchor(cfg: &MechanismConfig, q: &JointAngles, p: [f64; 2]) -> [f64; 3] {
    let l = cfg.link_length;
    let axes: Vec<usize> = if q.0.len() == 2 { vec![0, 2] } else { vec![0, 1, 2] };
    let mut r = translate(l);
    for (&axis, &a) in axes.iter().zip(&q.0).rev() {
        r = mul(&r, &rot(axis, a));
    }
    let t = mul(&r, &translate(-l));
    let x = [p[0], p[1], 2.0 * l, 1.0];
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = (0..4).map(|k| t[i][k] * x[k]).sum();
    }
    out
}

#[test]
fn anchors_match_homogeneous_transforms() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..500 {
        let dofs = rng.random_range(2..=3);
        let cfg = config(dofs, 3, 3);
        let d = random_design(&cfg, &mut rng);
        let q = random_angles(dofs, 60.0, &mut rng);
        for (w, path) in anchor_world_positions(&cfg, &d, &q).iter().enumerate() {
            let base = d.points[w][0];
            assert_eq!([path.anchors[0].x, path.anchors[0].y, path.anchors[0].z], [base[0], base[1], 0.0]);
            let m = path.anchors[1];
            let h = homogeneous_anchor(&cfg, &q, d.points[w][1]);
            for (x, y) in [m.x, m.y, m.z].iter().zip(h) {
                assert!((x - y).abs() < 1e-14, "{x} vs {y}");
            }
            for (j, seg) in path.segments.iter().enumerate() {
                assert_eq!(seg.start, path.anchors[j]);
                assert_eq!(seg.end, path.anchors[j + 1]);
            }
        }
    }
}

#[test]
fn roll_yaw_thirty_degrees() {
    let cfg = config(2, 1, 2);
    let d = DesignParams::new(vec![vec![[0.05, -0.1], [0.13, 0.07]]], &cfg).unwrap();
    let q = JointAngles::from_degrees(&[30.0, 30.0]);
    let m = anchor_world_positions(&cfg, &d, &q)[0].anchors[1];
    let h = homogeneous_anchor(&cfg, &q, [0.13, 0.07]);
    assert!((m.x - h[0]).abs() < 1e-15 && (m.y - h[1]).abs() < 1e-15 && (m.z - h[2]).abs() < 1e-15);
}

#[test]
fn lengths_match_direct_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let n = rng.random_range(2..=3);
        let cfg = config(2, 4, n);
        let d = random_design(&cfg, &mut rng);
        let q = JointAngles::from_degrees(&[20.0, -30.0]);
        let paths = anchor_world_positions(&cfg, &d, &q);
        for (l, path) in wire_lengths(&cfg, &d, &q).iter().zip(&paths) {
            let direct: f64 = path.anchors.windows(2).map(|w| w[0].distance(w[1])).sum();
            assert!((l - direct).abs() < 1e-15);
        }
    }
}

#[test]
fn jacobian_matches_central_differences() {
    let h = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let dofs = rng.random_range(2..=3);
        let cfg = config(dofs, rng.random_range(1..=6), rng.random_range(2..=3));
        let d = random_design(&cfg, &mut rng);
        let q = random_angles(dofs, 45.0, &mut rng);
        let g = muscle_jacobian(&cfg, &d, &q);
        for j in 0..dofs {
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp.0[j] += h;
            qm.0[j] -= h;
            let lp = wire_lengths(&cfg, &d, &qp);
            let lm = wire_lengths(&cfg, &d, &qm);
            for i in 0..cfg.wire_count {
                worst = worst.max((g.get(i, j) - (lp[i] - lm[i]) / (2.0 * h)).abs());
            }
        }
    }
    assert!(worst < 1e-6, "max deviation {worst:e}");
}

#[test]
fn fold_doubles_jacobian() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..300 {
        let dofs = rng.random_range(2..=3);
        let wires = rng.random_range(1..=6);
        let c2 = config(dofs, wires, 2);
        let c3 = config(dofs, wires, 3);
        let d = random_design(&c2, &mut rng);
        let q = random_angles(dofs, 45.0, &mut rng);
        let g = muscle_jacobian(&c2, &d, &q);
        let gf = muscle_jacobian(&c3, &d.fold_back(), &q);
        for i in 0..wires {
            for j in 0..dofs {
                let (a, b) = (2.0 * g.get(i, j), gf.get(i, j));
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{a} vs {b}");
            }
        }
        let l = wire_lengths(&c2, &d, &q);
        let lf = wire_lengths(&c3, &d.fold_back(), &q);
        for (a, b) in l.iter().zip(&lf) {
            assert!((2.0 * a - b).abs() <= 1e-15);
        }
    }
}

#[test]
fn permuting_wires_permutes_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let cfg = config(3, 5, 3);
    for _ in 0..100 {
        let d = random_design(&cfg, &mut rng);
        let q = random_angles(3, 45.0, &mut rng);
        let mut perm: Vec<usize> = (0..5).collect();
        for i in (1..5).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let g = muscle_jacobian(&cfg, &d, &q);
        let gp = muscle_jacobian(&cfg, &d.permuted(&perm), &q);
        let l = wire_lengths(&cfg, &d, &q);
        let lp = wire_lengths(&cfg, &d.permuted(&perm), &q);
        for (i, &src) in perm.iter().enumerate() {
            assert_eq!(gp.row(i), g.row(src));
            assert_eq!(lp[i], l[src]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn decoded_points_stay_on_disc(
        values in proptest::collection::vec(-1.0f64..=1.0, 12),
        radius in 1e-3f64..10.0,
    ) {
        let cfg = MechanismConfig::new(radius, 0.2, MechanismConfig::standard_joints(2), 2, 3, 0.0).unwrap();
        let d = decode_genome(&Genome(values.clone()), &cfg).unwrap();
        for (w, wire) in d.points.iter().enumerate() {
            for (j, p) in wire.iter().enumerate() {
                prop_assert!(p[0] * p[0] + p[1] * p[1] <= radius * radius);
                let (u, v) = (values[6 * w + 2 * j], values[6 * w + 2 * j + 1]);
                prop_assert_eq!(p[0], u * radius);
                let expected = v * (radius * radius - p[0] * p[0]).sqrt();
                prop_assert!((p[1] - expected).abs() <= 4.0 * f64::EPSILON * radius);
            }
        }
    }

    #[test]
    fn boundary_genome_collapses(v in -1.0f64..=1.0) {
        let cfg = config(2, 1, 2);
        let d = decode_genome(&Genome(vec![1.0, v, -1.0, v]), &cfg).unwrap();
        prop_assert_eq!(d.points[0][0], [0.2, 0.0]);
        prop_assert_eq!(d.points[0][1], [-0.2, 0.0]);
    }
}
