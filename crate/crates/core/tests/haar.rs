use polcorr::quadrature::HaarQuadrature;
use polcorr::rng::chunked_mean;
use polcorr::{haar_rotation, rotation_about, BlochVector, Rotation3, SeedStream};

const SAMPLES: usize = 1_000_000;

#[test]
fn haar_first_and_second_moments() {
    let e = BlochVector::new(0.3, -0.5, 0.2).normalized().unwrap();
    let stream = SeedStream::new(17);

    for i in 0..3 {
        let m = chunked_mean(stream.derive(i as u64), SAMPLES, |rng| {
            haar_rotation(rng).apply(e).to_array()[i]
        });
        assert!(m.mean().abs() < 5e-3, "⟨(Re)_{i}⟩ = {}", m.mean());
    }
    for i in 0..3 {
        for j in i..3 {
            let m = chunked_mean(
                stream.derive(10 + 3 * i as u64 + j as u64),
                SAMPLES,
                |rng| {
                    let v = haar_rotation(rng).apply(e).to_array();
                    v[i] * v[j]
                },
            );
            let target = if i == j { 1.0 / 3.0 } else { 0.0 };
            assert!(
                (m.mean() - target).abs() < 5e-3,
                "⟨(Re)_{i}(Re)_{j}⟩ = {}, want {target}",
                m.mean()
            );
        }
    }
}

#[test]
fn quadrature_matches_sampling_on_quartic_moment() {
    // ⟨z⁴⟩ = 1/5 for a uniform point on the sphere.
    let rule = HaarQuadrature::new(HaarQuadrature::DEFAULT_NODES).unwrap();
    let quad = rule.integrate(|r| r.apply(BlochVector::X).z.powi(4));
    assert!((quad - 0.2).abs() < 1e-12, "{quad}");

    let mc = chunked_mean(SeedStream::new(5), 400_000, |rng| {
        haar_rotation(rng).apply(BlochVector::X).z.powi(4)
    });
    assert!(
        (mc.mean() - quad).abs() < 3.0 * mc.std_error(),
        "{} ± {}",
        mc.mean(),
        mc.std_error()
    );
}

#[test]
fn long_products_stay_rotations() {
    let mut rng = SeedStream::new(99).rng();
    let mut acc = Rotation3::identity();
    for _ in 0..10_000 {
        acc = acc * haar_rotation(&mut rng);
        let (orth, det) = acc.invariant_errors();
        assert!(orth < 1e-10 && det < 1e-10, "orth {orth:e}, det {det:e}");
    }
}

#[test]
fn composition_is_associative_and_inverts() {
    let mut rng = SeedStream::new(3).rng();
    for _ in 0..1000 {
        let (a, b, c) = (
            haar_rotation(&mut rng),
            haar_rotation(&mut rng),
            haar_rotation(&mut rng),
        );
        assert!(((a * b) * c).max_abs_diff(&(a * (b * c))) < 1e-12);
        assert!((a * a.inverse()).max_abs_diff(&Rotation3::identity()) < 1e-12);
    }
}

#[test]
fn coaxial_rotations_add_angles() {
    let axis = BlochVector::new(1.0, 2.0, -2.0).scale(1.0 / 3.0);
    let a = rotation_about(axis, 0.7).unwrap();
    let b = rotation_about(axis, 1.9).unwrap();
    let ab = rotation_about(axis, 2.6).unwrap();
    assert!((a * b).max_abs_diff(&ab) < 1e-12);
}

#[test]
fn conjugated_axis_rotation() {
    // R · rot(n, θ) · Rᵀ = rot(R n, θ)
    let mut rng = SeedStream::new(8).rng();
    let n = BlochVector::Y;
    for _ in 0..200 {
        let r = haar_rotation(&mut rng);
        let lhs = r * rotation_about(n, 1.1).unwrap() * r.inverse();
        let rhs = rotation_about(r.apply(n), 1.1).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }
}
