//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit status if
//! any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use ndarray::{Array1, Array2};

use hybridprobe::analysis::{
    closed_cutoff_convergence, efficiency, entropy_scan, global_loss_ratio, optimal_subsystem_map, MapSpec, Scenario,
    Window, MAP_COUPLINGS,
};
use hybridprobe::dynamics::{
    diagonalize, evolve_open, DecoherenceRates, OpenIntegrator, OpenOptions, TimeGrid, DEFAULT_DT,
};
use hybridprobe::estimation::{
    fisher_scan, ClosedStencil, FisherRecord, InitialState, OpenStencil, ScanMode, StencilConfig, StencilFamily,
    DEFAULT_EPS_REL,
};
use hybridprobe::hilbert::{
    annihilation, coherent_state, number, thermal_state, DensityMatrix, HilbertDims, PartialTrace, PureState, Subsystem,
};
use hybridprobe::homodyne::{optimize_lo_phase, HomodyneProblem, QuadratureGrid};
use hybridprobe::model::{build_hamiltonian, initial_state_pure, initial_state_thermal, SystemParams};
use hybridprobe::oracles::{
    displaced_overlap, jc_qfi_g1, jc_state, optomech_inv_qfi_g2, optomech_state, polariton_center, polariton_splitting,
    polaron_angle_energy, polaron_displacement, polaron_propagate, Frame,
};
use hybridprobe::{Result, C64};

type Check = (bool, String);

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn closed_scan(p: &SystemParams, d: &HilbertDims, grid: &TimeGrid) -> Result<Vec<FisherRecord>> {
    fisher_scan(p, d, &StencilConfig::default(), grid, &InitialState::default(), &ScanMode::Closed)
}

/// Criterion 1: JC limit: global Q_11 against 4|α|²t² at ten times in (0, 2π].
fn jc_analytic_qfi(pool: &mut Vec<FisherRecord>) -> Result<Check> {
    let p = SystemParams::default().with_couplings(0.05, 0.0);
    let recs = closed_scan(&p, &HilbertDims::default(), &TimeGrid::uniform(2.0 * PI, 10)?)?;
    let worst = recs.iter().map(|r| rel(r.global.qfi.get(0, 0), jc_qfi_g1(c(2.0), r.t))).fold(0.0, f64::max);
    pool.extend(recs);
    Ok((worst < 0.01, format!("max relative error {worst:.2e} over 10 times (tol 1e-2)")))
}

/// Criterion 2: Optomechanical limit at ω_m t = 2π: global and light (Q_22)⁻¹.
fn optomech_analytic_bound(pool: &mut Vec<FisherRecord>) -> Result<Check> {
    let p = SystemParams::default().with_couplings(0.0, 0.1);
    let r = closed_scan(&p, &HilbertDims::default(), &TimeGrid::new(vec![2.0 * PI])?)?.remove(0);
    let expect = optomech_inv_qfi_g2(c(2.0), 0.1, 1)?;
    let global = r.global.inv_single[1];
    let light = r.subsystem(Subsystem::Cavity).inv_single[1];
    let (eg, el, elg) = (rel(global, expect), rel(light, expect), rel(light, global));
    pool.push(r);
    Ok((
        eg < 0.02 && el < 0.02 && elg < 0.02,
        format!(
            "analytic {expect:.5e}; global {global:.5e} ({eg:.2e}), light {light:.5e} ({el:.2e}), light vs global {elg:.2e} (tol 2e-2)"
        ),
    ))
}

/// Criterion 3: Full numerics against the analytic JC (g2 = 0) and optomechanical
/// (g1 = 0) states.
fn analytic_state_oracles() -> Result<Check> {
    let times = [PI / 2.0, PI, 2.0 * PI];
    let (alpha, beta) = (c(2.0), c(2.0));

    let d = HilbertDims::default();
    let p = SystemParams::default().with_couplings(0.1, 0.0);
    let prop = diagonalize(&build_hamiltonian(&p, &d)?)?;
    let psi0 = initial_state_pure(alpha, beta, &d)?;
    let mut jc_min = 1.0f64;
    for t in times {
        let jc = jc_state(alpha, p.g1, p.omega_c, t, d.cavity, Frame::Lab)?;
        let mech = coherent_state(beta * C64::from_polar(1.0, -p.omega_m * t), d.mechanics)?;
        jc_min = jc_min.min(prop.evolve(&psi0, t)?.fidelity(&PureState::tensor(&[&jc, &mech])?)?);
    }

    // the mechanical displacement needs a deeper phonon cutoff than 25
    let d = HilbertDims::new(25, 60)?;
    let p = SystemParams::default().with_couplings(0.0, 0.1);
    let prop = diagonalize(&build_hamiltonian(&p, &d)?)?;
    let psi0 = initial_state_pure(alpha, beta, &d)?;
    let g = PureState::basis(2, 0)?;
    let mut om_min = 1.0f64;
    for t in times {
        let om = optomech_state(alpha, beta, p.g2, &p, t, &d, Frame::Lab)?;
        om_min = om_min.min(prop.evolve(&psi0, t)?.fidelity(&PureState::tensor(&[&g, &om])?)?);
    }
    Ok((
        jc_min >= 1.0 - 1e-6 && om_min >= 1.0 - 1e-6,
        format!(
            "min fidelity JC 1-{:.1e}, optomechanical 1-{:.1e} (cutoffs 25x60) (tol 1e-6)",
            1.0 - jc_min,
            1.0 - om_min
        ),
    ))
}

/// Criterion 4: Polaron structure: displaced-basis completeness, displacement-operator
/// agreement, eigen-residuals and the JC limit of the propagator.
fn polaron_structure() -> Result<Check> {
    let g2 = 0.2;
    let mut completeness = 0.0f64;
    for n in 0..=5 {
        for m in 0..=5 {
            let total: f64 = (0..80).map(|l| displaced_overlap(l, m, n, g2, 1.0).powi(2)).sum();
            completeness = completeness.max((total - 1.0).abs());
        }
    }

    // e^{x(b† − b)} = e^{−ixH} with H = i(b† − b)
    let dim = 60;
    let b = annihilation(dim)?;
    let prop = diagonalize(&(&b.dagger() - &b).scale(C64::new(0.0, 1.0)))?;
    let mut displacement = 0.0f64;
    for n in 1..=5 {
        let x = polaron_displacement(n, g2, 1.0);
        for m in 0..=5 {
            let displaced = prop.evolve(&PureState::basis(dim, m)?, x)?;
            for l in 0..20 {
                displacement =
                    displacement.max((displaced.amplitudes()[l] - c(displaced_overlap(l, m, n, g2, 1.0))).norm());
            }
        }
    }

    // sector Hamiltonian on (±, m): diag m ω_m ± Ω/2, −(g2/2)√(m+1) between
    // |+, m⟩ and |−, m+1⟩; eigenvectors (cos θ, sin θ) ↦ E₊, (−sin θ, cos θ) ↦ E₋
    let p = SystemParams::default().with_couplings(0.05, g2);
    let big = 14;
    let mut residual = 0.0f64;
    for n in [1usize, 4, 25, 100] {
        let omega = polariton_splitting(n, p.g1);
        let shift = polariton_center(n, p.omega_c);
        let mut h = Array2::<f64>::zeros((2 * big, 2 * big));
        for m in 0..big {
            h[[2 * m, 2 * m]] = shift + p.omega_m * m as f64 + omega / 2.0;
            h[[2 * m + 1, 2 * m + 1]] = shift + p.omega_m * m as f64 - omega / 2.0;
            if m + 1 < big {
                let v = -p.g2 / 2.0 * ((m + 1) as f64).sqrt();
                h[[2 * m, 2 * (m + 1) + 1]] = v;
                h[[2 * (m + 1) + 1, 2 * m]] = v;
            }
        }
        for m in 1..big {
            let lvl = polaron_angle_energy(n, m, &p);
            let (s, co) = lvl.theta.sin_cos();
            for (x, y, e) in [(co, s, lvl.e_plus), (-s, co, lvl.e_minus)] {
                let mut v = Array1::<f64>::zeros(2 * big);
                v[2 * (m - 1)] = x;
                v[2 * m + 1] = y;
                let r = h.dot(&v) - &v * e;
                residual = residual.max(r.iter().fold(0.0, |a, z| a.max(z.abs())));
            }
        }
    }

    let d = HilbertDims::default();
    let (alpha, beta) = (c(2.0), c(2.0));
    let psi0 = initial_state_pure(alpha, beta, &d)?;
    let p0 = SystemParams::default().with_couplings(0.05, 0.0);
    let mut jc_limit = 1.0f64;
    for t in [1.0, 2.0 * PI] {
        let jc = jc_state(alpha, p0.g1, p0.omega_c, t, d.cavity, Frame::Lab)?;
        let mech = coherent_state(beta * C64::from_polar(1.0, -t), d.mechanics)?;
        jc_limit = jc_limit.min(polaron_propagate(&psi0, &p0, &d, t)?.fidelity(&PureState::tensor(&[&jc, &mech])?)?);
    }

    // the polaron picture is approximate once both couplings act; report only
    let p1 = SystemParams::default().with_couplings(0.05, 0.01);
    let full = diagonalize(&build_hamiltonian(&p1, &d)?)?.evolve(&psi0, 2.0 * PI)?;
    let approx = polaron_propagate(&psi0, &p1, &d, 2.0 * PI)?.fidelity(&full)?;

    Ok((
        completeness <= 1e-8 && displacement <= 1e-8 && residual < 1e-10 && jc_limit >= 1.0 - 1e-8,
        format!(
            "completeness {completeness:.1e}, displacement {displacement:.1e}, eigen-residual {residual:.1e}, \
             JC limit 1-{:.1e}; polaron vs full numerics (g1=0.05, g2=0.01, 2pi) fidelity {approx:.6}",
            1.0 - jc_limit
        ),
    ))
}

/// Criterion 5: Data processing on a 3×3 coupling grid × 20 times.
fn data_processing(pool: &mut Vec<FisherRecord>) -> Result<Check> {
    let d = HilbertDims::default();
    let grid = TimeGrid::uniform(6.0 * PI, 20)?;
    let couplings = [0.01, 0.1, 0.2];
    let (mut dpi, mut eta_worst, mut eta_count) = (0.0f64, (1.0f64, 0.0f64), 0);
    let mut nuisance_excess = 0.0f64;
    for &g1 in &couplings {
        for &g2 in &couplings {
            let p = SystemParams::default().with_couplings(g1, g2);
            let recs = closed_scan(&p, &d, &grid)?;
            for r in &recs {
                for s in Subsystem::ALL {
                    for i in 0..2 {
                        let (sub, glob) = (r.subsystem(s).qfi.get(i, i), r.global.qfi.get(i, i));
                        dpi = dpi.max((sub - glob) / glob.abs().max(f64::MIN_POSITIVE));
                    }
                    // per-record ratios global/sub for every scenario
                    for sc in Scenario::ALL {
                        let (g, b) = (sc.bound(&r.global), sc.bound(r.subsystem(s)));
                        if g.is_finite() {
                            let eta = g / b;
                            eta_worst = (eta_worst.0.min(eta), eta_worst.1.max(eta));
                            eta_count += 1;
                        }
                    }
                }
            }
            for w in Window::ALL {
                for sc in Scenario::ALL {
                    let e = efficiency(&recs, w, sc, &p)?;
                    eta_worst = (eta_worst.0.min(e.eta), eta_worst.1.max(e.eta));
                    eta_count += 1;
                }
                for (single, nuisance) in
                    [(Scenario::SingleG1, Scenario::NuisanceG1), (Scenario::SingleG2, Scenario::NuisanceG2)]
                {
                    let excess = efficiency(&recs, w, nuisance, &p)?.eta - efficiency(&recs, w, single, &p)?.eta;
                    nuisance_excess = nuisance_excess.max(excess);
                }
            }
            pool.extend(recs);
        }
    }
    Ok((
        dpi <= 1e-6 && eta_worst.0 >= 0.0 && eta_worst.1 <= 1.0 + 1e-6,
        format!(
            "max (Q_sub - Q_global)/Q_global {dpi:.1e} (tol 1e-6); {eta_count} eta values in [{:.3e}, {:.9}]; \
             max nuisance-eta minus single-eta {nuisance_excess:.3}",
            eta_worst.0, eta_worst.1
        ),
    ))
}

/// Criterion 6: Multiparameter algebra on every record computed above.
fn multiparameter_algebra(pool: &[FisherRecord]) -> Check {
    let (mut order, mut trace, mut count) = (0.0f64, 0.0f64, 0);
    let mut consistent = true;
    for r in pool {
        for e in std::iter::once(&r.global).chain(&r.subsystems) {
            count += 1;
            for i in 0..2 {
                if e.inv_single[i].is_finite() && e.nuisance[i].is_finite() {
                    order = order.max((e.inv_single[i] - e.nuisance[i]) / e.inv_single[i]);
                } else if e.nuisance[i].is_finite() {
                    consistent = false;
                }
            }
            if e.scalar.is_finite() {
                trace = trace.max((e.scalar - e.nuisance[0] - e.nuisance[1]).abs() / e.scalar);
            } else if e.nuisance.iter().all(|v| v.is_finite()) {
                consistent = false;
            }
        }
    }
    (
        consistent && order <= 1e-12 && trace <= 1e-12,
        format!(
            "{count} Fisher matrices: max (1/Q_jj - (Q^-1)_jj)/(1/Q_jj) {order:.1e}, \
             max |Tr Q^-1 - sum nuisance|/Tr {trace:.1e} (tol 1e-12)"
        ),
    )
}

/// Criterion 7: Homodyne chain `Tr F⁻¹ ≥ Tr Q⁻¹_light ≥ Tr Q⁻¹_global` and the Gaussian
/// mean-shift CFI.
fn measurement_bound(pool: &mut Vec<FisherRecord>) -> Result<Check> {
    let p = SystemParams::default().with_couplings(0.1, 0.1);
    let stencil = ClosedStencil::new(&p, &HilbertDims::default(), &StencilConfig::default(), &InitialState::default())?;
    let grid = QuadratureGrid::default();
    let mut ok = true;
    let mut rows = Vec::new();
    for t in [PI, 2.0 * PI, 4.0 * PI] {
        let r = stencil.record_at(t)?;
        let family = stencil.reduced_family(t, Subsystem::Cavity)?;
        let (q_light, _) = family.qfi(DEFAULT_EPS_REL)?;
        let light = q_light.scalar_bound();
        let hd = optimize_lo_phase(&family, &grid, 120)?.best_scalar;
        ok &= hd >= light * (1.0 - 1e-6) && light >= r.global.scalar * (1.0 - 1e-6);
        rows.push(format!("t={:.2}: {hd:.4e} >= {light:.4e} >= {:.4e}", t, r.global.scalar));
        pool.push(r);
    }

    // coherent states |θ/√2⟩ read out at φ = 0: x ~ N(θ, 1/2), CFI = 2
    let dim = 30;
    let delta = 1e-4;
    let theta0 = 0.7;
    let member =
        |th: f64| -> Result<Array2<C64>> { Ok(coherent_state(c(th / 2f64.sqrt()), dim)?.to_density().into_matrix()) };
    let center = member(theta0)?;
    let mut members = vec![center.clone()];
    for k in [-2.0, -1.0, 1.0, 2.0] {
        members.push(member(theta0 + k * delta)?);
    }
    members.extend(std::iter::repeat_n(center, 4));
    let family = StencilFamily::new(members, StencilConfig::uniform(delta))?;
    let cfi = HomodyneProblem::new(&family, &grid)?.fisher(0.0).get(0, 0);
    let shift_err = rel(cfi, 2.0);
    ok &= shift_err < 0.005;
    Ok((ok, format!("{}; mean-shift CFI {cfi:.6} (rel err {shift_err:.1e}, tol 5e-3)", rows.join(", "))))
}

/// Criterion 8: Open dynamics: zero-rate equivalence, trace drift, decay oracles.
fn open_dynamics() -> Result<Check> {
    let d = HilbertDims::reduced();
    let p = SystemParams::default();
    let (alpha, beta) = (c(2.0), c(2.0));
    let psi0 = initial_state_pure(alpha, beta, &d)?;
    let opts = OpenOptions { check_positivity: false, ..Default::default() };
    let rho =
        evolve_open(&p, &d, &DecoherenceRates::zero(), &psi0.to_density(), &TimeGrid::new(vec![2.0 * PI])?, &opts)?;
    let closed = diagonalize(&build_hamiltonian(&p, &d)?)?.evolve(&psi0, 2.0 * PI)?;
    let zero_rate = rho[0].fidelity_with_pure(&closed)?;

    let rho0 = initial_state_thermal(alpha, 1.0, &d)?;
    let mut integ = OpenIntegrator::new(&p, &d, &DecoherenceRates::default(), &rho0, DEFAULT_DT)?;
    let mut drift = 0.0f64;
    for k in 1..=3 {
        integ.advance_to(2.0 * PI * k as f64)?;
        drift = drift.max(integ.trace_drift());
    }
    let min_eig = integ.state_lab().min_eigenvalue()?;

    let free = SystemParams::default().with_couplings(0.0, 0.0);
    let mut oracle = 0.0f64;
    // cavity: ⟨a†a⟩ = n0 e^{−κt}
    let dc = HilbertDims::new(30, 1)?;
    let kappa = 0.3;
    let r = DecoherenceRates { kappa, ..DecoherenceRates::zero() };
    let rho0 = initial_state_pure(c(2.0), c(0.0), &dc)?.to_density();
    let n_a = number(30)?;
    let photons =
        |rho: &DensityMatrix| -> Result<f64> { Ok(rho.partial_trace(&dc, Subsystem::Cavity)?.expectation(&n_a)?.re) };
    let n0 = photons(&rho0)?;
    let grid = TimeGrid::new(vec![1.0, 3.0])?;
    for (rho, &t) in evolve_open(&free, &dc, &r, &rho0, &grid, &OpenOptions::default())?.iter().zip(grid.times()) {
        oracle = oracle.max(rel(photons(rho)?, n0 * (-kappa * t).exp()));
    }
    // mechanics: ⟨b†b⟩ = N̄(1 − e^{−Γt}) from the ground state; thermal state stationary
    let dm = HilbertDims::new(1, 40)?;
    let (big_gamma, nbar) = (0.2, 2.0);
    let r = DecoherenceRates { big_gamma, nbar, ..DecoherenceRates::zero() };
    let n_b = number(40)?;
    let ground = initial_state_pure(c(0.0), c(0.0), &dm)?.to_density();
    for (rho, &t) in evolve_open(&free, &dm, &r, &ground, &grid, &OpenOptions::default())?.iter().zip(grid.times()) {
        let m = rho.partial_trace(&dm, Subsystem::Mechanics)?.expectation(&n_b)?.re;
        oracle = oracle.max(rel(m, nbar * (1.0 - (-big_gamma * t).exp())));
    }
    let th = thermal_state(nbar, 40)?;
    let rho_th =
        DensityMatrix::tensor(&[&PureState::basis(2, 0)?.to_density(), &PureState::basis(1, 0)?.to_density(), &th])?;
    let later = evolve_open(&free, &dm, &r, &rho_th, &TimeGrid::new(vec![5.0])?, &OpenOptions::default())?;
    let m = later[0].partial_trace(&dm, Subsystem::Mechanics)?.expectation(&n_b)?.re;
    oracle = oracle.max(rel(m, th.expectation(&n_b)?.re));
    // qubit dephasing: |ρ_ge| = ½ e^{−γt}
    let dq = HilbertDims::new(1, 1)?;
    let gamma = 0.5;
    let r = DecoherenceRates { gamma, ..DecoherenceRates::zero() };
    let plus = PureState::new(Array1::from(vec![c(1.0), c(1.0)]))?;
    let s = evolve_open(&free, &dq, &r, &plus.to_density(), &TimeGrid::new(vec![2.0])?, &OpenOptions::default())?;
    oracle = oracle.max(rel(s[0].matrix()[[0, 1]].norm(), 0.5 * (-gamma * 2.0).exp()));

    Ok((
        zero_rate >= 1.0 - 1e-8 && drift < 1e-8 && oracle < 0.01,
        format!(
            "zero-rate fidelity 1-{:.1e} (tol 1e-8); trace drift {drift:.1e} over 6pi at default rates (tol 1e-8), \
             min eigenvalue {min_eig:.1e}; decay/fixed-point oracles max rel err {oracle:.1e} (tol 1e-2)",
            1.0 - zero_rate
        ),
    ))
}

/// Criterion 9: Qualitative properties of entropies, maps and loss ratios.
fn qualitative_properties() -> Result<Check> {
    let mut ok = true;
    let mut notes = Vec::new();

    // (a) near-disentanglement of the mechanics at ω_m t = 2π
    let p = SystemParams::default().with_couplings(0.01, 0.2);
    let d = HilbertDims::default();
    let ent = entropy_scan(&p, &d, c(2.0), c(2.0), &TimeGrid::standard())?;
    let peak = ent.iter().map(|r| r.mechanics).fold(0.0, f64::max);
    let at = ent.iter().min_by(|a, b| (a.t - 2.0 * PI).abs().total_cmp(&(b.t - 2.0 * PI).abs())).expect("grid");
    let dev = ent.iter().map(|r| (r.cavity - r.mechanics).abs()).fold(0.0, f64::max);
    let a_ok = at.mechanics < 0.2 * peak;
    ok &= a_ok;
    notes.push(format!(
        "(a) {} S_mech(2pi) {:.3e} vs peak {peak:.3} (|S_cav - S_mech| max {dev:.3})",
        verdict(a_ok),
        at.mechanics
    ));

    // (b), (c) optimal-subsystem maps on the default 5×5 grid
    let spec = MapSpec {
        base: SystemParams::default(),
        dims: d,
        stencil: StencilConfig::default(),
        grid: TimeGrid::standard(),
        initial: InitialState::default(),
        g1_values: MAP_COUPLINGS.to_vec(),
        g2_values: MAP_COUPLINGS.to_vec(),
        windows: vec![Window::Long, Window::Short],
        scenarios: vec![Scenario::SingleG1, Scenario::SingleG2],
    };
    let map = optimal_subsystem_map(&spec)?;
    let cells = |w: Window, s: Scenario| map.iter().filter(move |r| r.window == w && r.scenario == s);
    let b_ok = cells(Window::Long, Scenario::SingleG2).all(|r| r.best_subsystem == Subsystem::Cavity);
    ok &= b_ok;
    let short_small_g2 = cells(Window::Short, Scenario::SingleG2)
        .filter(|r| r.g2 == MAP_COUPLINGS[0])
        .all(|r| r.best_subsystem == Subsystem::Mechanics);
    notes.push(format!(
        "(b) {} single-g2/long: cavity optimal in {}/25 cells (single-g2/short at g2=0.01 mechanics everywhere: {short_small_g2})",
        verdict(b_ok),
        cells(Window::Long, Scenario::SingleG2).filter(|r| r.best_subsystem == Subsystem::Cavity).count()
    ));
    let g1_long: Vec<_> = cells(Window::Long, Scenario::SingleG1).collect();
    let below = g1_long.iter().filter(|r| r.g1 < 0.05).all(|r| r.best_subsystem == Subsystem::Qubit);
    let above = g1_long.iter().filter(|r| r.g1 > 0.05).all(|r| r.best_subsystem == Subsystem::Cavity);
    let at_05: Vec<&str> = g1_long.iter().filter(|r| r.g1 == 0.05).map(|r| r.best_subsystem.label()).collect();
    let c_ok = below && above;
    ok &= c_ok;
    notes.push(format!(
        "(c) {} single-g1/long: qubit for g1<0.05 {below}, cavity for g1>0.05 {above}, at g1=0.05 [{}]",
        verdict(c_ok),
        at_05.join(" ")
    ));

    // (d) closed-to-open loss ratio at default rates, thermal mechanics
    let d15 = HilbertDims::reduced();
    let init = InitialState::Thermal { alpha: 2.0, nbar: 1.0 };
    let grid = TimeGrid::uniform(2.0 * PI, 40)?;
    let p = SystemParams::default();
    let closed = fisher_scan(&p, &d15, &StencilConfig::default(), &grid, &init, &ScanMode::Closed)?;
    let mut stencil =
        OpenStencil::new(&p, &d15, &StencilConfig::default(), &init, &DecoherenceRates::default(), DEFAULT_DT)?;
    let mut open = Vec::new();
    for &t in grid.times() {
        stencil.advance_to(t)?;
        open.push(stencil.record()?);
    }
    let mut mus = Vec::new();
    let mut d_ok = true;
    for sc in Scenario::ALL {
        let mu = global_loss_ratio(&closed, &open, Window::Short, sc)?;
        d_ok &= mu.mu >= 0.5 && mu.mu <= 1.0 + 1e-6;
        mus.push(format!("{sc} {:.4} (loss {:.1}%)", mu.mu, 100.0 * (1.0 - mu.mu)));
    }
    ok &= d_ok;
    notes.push(format!("(d) {} mu at default rates, cutoffs 15x15: {}", verdict(d_ok), mus.join(", ")));

    // cutoff convergence of the closed dynamics behind the maps (reported)
    let conv = closed_cutoff_convergence(
        &SystemParams::default(),
        &d,
        &InitialState::default(),
        &TimeGrid::new(vec![PI, 2.0 * PI, 6.0 * PI])?,
    )?;
    notes.push(format!("{}: max observable deviation {:.1e}", conv.study, conv.max_deviation));

    Ok((ok, notes.join("; ")))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "VIOLATED"
    }
}

fn report(id: u8, name: &str, start: Instant, outcome: Result<Check>) -> bool {
    let secs = start.elapsed().as_secs_f64();
    let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    println!("{} [{id}] {name}: {detail} ({secs:.1}s)", if pass { "PASS" } else { "FAIL" });
    pass
}

fn main() -> ExitCode {
    let mut pool = Vec::new();
    let mut all = true;

    let t = Instant::now();
    all &= report(1, "JC analytic QFI", t, jc_analytic_qfi(&mut pool));
    let t = Instant::now();
    all &= report(2, "optomechanical analytic bound", t, optomech_analytic_bound(&mut pool));
    let t = Instant::now();
    all &= report(3, "analytic-state oracles", t, analytic_state_oracles());
    let t = Instant::now();
    all &= report(4, "polaron structure", t, polaron_structure());
    let t = Instant::now();
    all &= report(5, "data-processing properties", t, data_processing(&mut pool));
    let t = Instant::now();
    let measurement = measurement_bound(&mut pool);
    let algebra_start = Instant::now();
    all &= report(6, "multiparameter algebra", algebra_start, Ok(multiparameter_algebra(&pool)));
    all &= report(7, "measurement bound", t, measurement);
    let t = Instant::now();
    all &= report(8, "open dynamics", t, open_dynamics());
    let t = Instant::now();
    all &= report(9, "qualitative properties", t, qualitative_properties());

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
