use pdarray_core::hexgeom::{array_size, layout, DistanceModel, PdRole};

#[test]
fn multiplicities_add_up() {
    for g in 0..=40 {
        for model in [DistanceModel::InradiusEdges, DistanceModel::ExactLattice] {
            assert_eq!(layout(g, 0.3, model).unwrap().pd_count(), array_size(g));
        }
    }
}

#[test]
fn models_agree_on_corners_and_first_ring() {
    for g in 1..=12 {
        let a = layout(g, 0.7, DistanceModel::InradiusEdges).unwrap();
        let b = layout(g, 0.7, DistanceModel::ExactLattice).unwrap();
        for ring in 1..=g {
            let corner = a.sites().iter().find(|s| s.role == PdRole::Corner(ring)).unwrap().offset;
            let exact: Vec<_> = b.sites().iter().filter(|s| s.role == PdRole::Corner(ring)).collect();
            assert_eq!(exact.len(), 6);
            for s in exact {
                assert!((s.offset - corner).abs() < 1e-12);
            }
        }
        for s in b.sites().iter().filter(|s| s.role.ring() == 1) {
            assert!((s.offset - 1.4).abs() < 1e-12);
        }
    }
}

/// Brute-force lattice: every point i·u + j·v with |i|,|j| ≤ G whose hex
/// distance from the origin is at most G.
fn brute_force_centers(g: i64, rho: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for i in -g..=g {
        for j in -g..=g {
            let hex = i.abs().max(j.abs()).max((i + j).abs());
            if hex <= g {
                let x = 2.0 * rho * (i as f64 + 0.5 * j as f64);
                let y = 2.0 * rho * (3f64.sqrt() / 2.0 * j as f64);
                out.push([x, y]);
            }
        }
    }
    out
}

#[test]
fn exact_lattice_matches_brute_force_positions() {
    for g in 0..=6u32 {
        let rho = 0.45;
        let l = layout(g, rho, DistanceModel::ExactLattice).unwrap();
        let mut got: Vec<[f64; 2]> = l.sites().iter().map(|s| s.position.unwrap()).collect();
        let mut want = brute_force_centers(g as i64, rho);
        let key = |p: &[f64; 2]| ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
        got.sort_by_key(key);
        want.sort_by_key(key);
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
        for s in l.sites() {
            let [x, y] = s.position.unwrap();
            assert!((x.hypot(y) - s.offset).abs() < 1e-12);
        }
    }
}

#[test]
fn exact_lattice_disks_do_not_overlap_and_fit_the_array_hexagon() {
    for g in 0..=8u32 {
        let rho = 0.3;
        let l = layout(g, rho, DistanceModel::ExactLattice).unwrap();
        let centers: Vec<[f64; 2]> = l.sites().iter().map(|s| s.position.unwrap()).collect();
        for (i, a) in centers.iter().enumerate() {
            for b in &centers[i + 1..] {
                assert!((a[0] - b[0]).hypot(a[1] - b[1]) >= 2.0 * rho - 1e-12);
            }
            // The outermost disks reach 2Gρ + ρ from the axis.
            assert!(a[0].hypot(a[1]) + rho <= (2 * g + 1) as f64 * rho + 1e-12);
        }
    }
}

#[test]
fn inradius_model_understates_edge_distances() {
    let a = layout(4, 1.0, DistanceModel::InradiusEdges).unwrap();
    let b = layout(4, 1.0, DistanceModel::ExactLattice).unwrap();
    let inradius = a.sites().iter().find(|s| s.role == PdRole::Edge(4)).unwrap().offset;
    for s in b.sites().iter().filter(|s| s.role == PdRole::Edge(4)) {
        assert!(s.offset >= inradius - 1e-12);
    }
}
