use korn_core::grid::{Face, GammaSpec, Grid, Pointwise, Preset};
use korn_core::identities::Sampler;
use korn_core::korn::Bc;
use korn_core::poly::Aabb;
use korn_core::poly_fields::{KernelFamily, PolyMat3};
use korn_core::scalar::{rat, Rational};

/// Independent count: lattice points that are a corner of at least one cell
/// whose center lies in the union, and how many of them touch an outside cell.
fn rasterize(boxes: &[[[f64; 3]; 2]], h: f64) -> (usize, usize) {
    let hi = boxes.iter().fold([0.0f64; 3], |m, b| [m[0].max(b[1][0]), m[1].max(b[1][1]), m[2].max(b[1][2])]);
    let n = hi.map(|v| (v / h).round() as i64);
    let inside = |c: [i64; 3]| {
        let center = c.map(|v| (v as f64 + 0.5) * h);
        boxes.iter().any(|b| (0..3).all(|k| b[0][k] < center[k] && center[k] < b[1][k]))
    };
    let (mut nodes, mut boundary) = (0, 0);
    for i in 0..=n[0] {
        for j in 0..=n[1] {
            for k in 0..=n[2] {
                let mut cells = 0;
                for d in 0..8 {
                    let c = [i - (d & 1), j - ((d >> 1) & 1), k - ((d >> 2) & 1)];
                    cells += inside(c) as usize;
                }
                if cells > 0 {
                    nodes += 1;
                    boundary += (cells < 8) as usize;
                }
            }
        }
    }
    (nodes, boundary)
}

fn counts(g: &Grid) -> (usize, usize) {
    (g.num_nodes(), (0..g.num_nodes()).filter(|&n| g.is_boundary(n)).count())
}

#[test]
fn union_of_unit_cube_and_neighbor_matches_rasterization() {
    let boxes = [Aabb::from_ints([0, 0, 0], [1, 1, 1]), Aabb::from_ints([1, 0, 0], [2, 1, 1])];
    let g = Grid::build(&boxes, &rat(1, 2), &GammaSpec::None).unwrap();
    let oracle = rasterize(&[[[0.0; 3], [1.0; 3]], [[1.0, 0.0, 0.0], [2.0, 1.0, 1.0]]], 0.5);
    assert_eq!(counts(&g), oracle);
    assert_eq!(oracle, (45, 42));
}

#[test]
fn presets_match_rasterization() {
    let l = [[[0.0; 3], [2.0, 1.0, 1.0]], [[0.0; 3], [1.0, 2.0, 1.0]]];
    for h in [rat(1, 2), rat(1, 4)] {
        let hf = korn_core::scalar::Field::to_f64(&h);
        let g = Grid::preset(Preset::LShape, &h, &GammaSpec::None).unwrap();
        assert_eq!(counts(&g), rasterize(&l, hf), "lshape h={h}");
        let g = Grid::preset(Preset::Slab, &h, &GammaSpec::None).unwrap();
        assert_eq!(counts(&g), rasterize(&[[[0.0; 3], [2.0, 1.0, 1.0]]], hf), "slab h={h}");
    }
}

#[test]
fn kernel_families_are_discretely_exact_on_every_domain() {
    for preset in [Preset::Cube, Preset::LShape] {
        for h in [rat(1, 2), rat(1, 4)] {
            let g = Grid::preset(preset, &h, &GammaSpec::None).unwrap();
            let curl = g.curl_op();
            for family in KernelFamily::ALL {
                let (sym_kind, dev_curl) = match family {
                    KernelFamily::DevSymCurl => (Pointwise::DevSym, false),
                    KernelFamily::SymDevCurl => (Pointwise::Sym, true),
                    KernelFamily::DevSymDevCurl => (Pointwise::DevSym, true),
                    KernelFamily::SymCurl => (Pointwise::Sym, false),
                };
                for t in family.basis() {
                    let p = g.sample(&t).values;
                    let mut c = curl.matvec(&p);
                    if dev_curl {
                        c = g.pointwise_op(Pointwise::Dev).matvec(&c);
                    }
                    let s = g.pointwise_op(sym_kind).matvec(&p);
                    let worst = c.iter().chain(&s).fold(0.0f64, |m, v| m.max(v.abs()));
                    assert!(worst <= 1e-10, "{family:?} on {} h={h}: {worst}", preset.name());
                }
            }
        }
    }
}

/// Returns `(|<Curl p, q> - <p, Curl q>|, |<Curl p, q>| + |<p, Curl q>|)`.
fn adjoint_mismatch(h: Rational, p: &PolyMat3, q: &PolyMat3) -> (f64, f64) {
    let g = Grid::preset(Preset::Cube, &h, &Bc::Full.gamma()).unwrap();
    let mask = g.bc_mask();
    let (p, q) = (mask.matvec(&g.sample(p).values), mask.matvec(&g.sample(q).values));
    let curl = g.curl_op();
    let w = g.node_weights();
    let inner = |a: &[f64], b: &[f64]| a.iter().zip(b).enumerate().map(|(k, (x, y))| w[k / 9] * x * y).sum::<f64>();
    let (l, r) = (inner(&curl.matvec(&p), &q), inner(&p, &curl.matvec(&q)));
    ((l - r).abs(), l.abs() + r.abs())
}

#[test]
fn mass_integrates_constants_and_linears() {
    for (preset, volume, x1_moment) in [(Preset::Cube, 1.0, 0.5), (Preset::LShape, 3.0, 2.5), (Preset::Slab, 2.0, 2.0)] {
        let g = Grid::preset(preset, &rat(1, 4), &GammaSpec::None).unwrap();
        let w = g.node_weights();
        assert!(w.iter().all(|&x| x > 0.0));
        let vol: f64 = w.iter().sum();
        let m1: f64 = (0..g.num_nodes()).map(|n| w[n] * g.position_f64(n)[0]).sum();
        assert!((vol - volume).abs() < 1e-12, "{}", preset.name());
        assert!((m1 - x1_moment).abs() < 1e-12, "{}", preset.name());
    }
}

#[test]
fn mask_is_an_idempotent_selector() {
    for bc in [Bc::Full, Bc::Partial(vec!["z-".parse::<Face>().unwrap(), "x+".parse::<Face>().unwrap()])] {
        let g = Grid::preset(Preset::LShape, &rat(1, 4), &bc.gamma()).unwrap();
        let m = g.bc_mask();
        let m2 = m.compose(&m).unwrap();
        assert_eq!(m.triplets().collect::<Vec<_>>(), m2.triplets().collect::<Vec<_>>());
        assert!(m.triplets().all(|(r, c, v)| r == c && v == 1.0));
        assert!(m.nnz() < 9 * g.num_nodes());
    }
}

#[test]
fn curl_is_adjoint_for_masked_fields() {
    // the surviving boundary terms pair tangential columns only, which the mask
    // removes, so the mismatch is roundoff rather than merely O(h)
    let mut s = Sampler::new(11);
    let (p, q) = (s.poly_mat(4), s.poly_mat(4));
    for h in [rat(1, 4), rat(1, 8), rat(1, 16)] {
        let (e, scale) = adjoint_mismatch(h.clone(), &p, &q);
        assert!(scale > 1.0 && e <= 1e-12 * scale, "h={h}: {e} vs {scale}");
    }
}
