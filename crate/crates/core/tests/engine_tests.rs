//! Engine checks against a scalar reimplementation built straight from the adjacency.

use std::sync::Arc;

use coalition_nash::engine::*;
use coalition_nash::game::*;
use coalition_nash::topology::NetworkTopology;
use coalition_nash::Error;
use proptest::prelude::*;

/// Loop-only restatement of both update rules, sharing nothing with the library beyond raw data.
struct Oracle {
    n: usize,
    coalition: Vec<usize>,
    members: Vec<Vec<usize>>,
    adj: Vec<Vec<bool>>,
    params: Vec<(f64, f64, Vec<f64>)>,
    holdings: Vec<f64>,
}

impl Oracle {
    fn new(game: &Game) -> Self {
        let t = game.topology();
        let n = t.n_sum();
        let coalition: Vec<usize> = (0..n).map(|a| t.coalition_of(a)).collect();
        let mut members = vec![Vec::new(); t.num_coalitions()];
        for a in 0..n {
            members[coalition[a]].push(a);
        }
        let adj = (0..n).map(|a| (0..n).map(|p| t.adjacency(a, p) == 1).collect()).collect();
        let params = game
            .objectives()
            .iter()
            .map(|o| {
                let q = o.as_quadratic().expect("quadratic");
                (q.q, q.b, q.coupling.clone())
            })
            .collect();
        Self { n, coalition, members, adj, params, holdings: game.holdings().to_vec() }
    }

    fn grad(&self, a: usize, t: usize, x: &[f64]) -> f64 {
        let (q, b, c) = &self.params[a];
        let mut g = 0.5 * x[a] * c[t];
        if t == a {
            g += 2.0 * q * (x[a] - b);
            for r in 0..self.n {
                g += 0.5 * c[r] * x[r];
            }
        }
        g
    }

    fn intra(&self, a: usize, b: usize) -> bool {
        self.adj[a][b] && self.coalition[a] == self.coalition[b]
    }

    fn lap(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for a in 0..self.n {
            for b in 0..self.n {
                if self.intra(a, b) {
                    out[a] += v[a] - v[b];
                }
            }
        }
        out
    }

    fn degree(&self, a: usize) -> usize {
        (0..self.n).filter(|&b| self.adj[a][b]).count()
    }

    fn estimate(&self, xi: &[Vec<f64>], x: &[f64]) -> Vec<Vec<f64>> {
        let mut out = xi.to_vec();
        for a in 0..self.n {
            let d = self.degree(a);
            let h = d as f64 + if d > 0 { 2.0 } else { 1.0 };
            for p in 0..self.n {
                let mut pull = 0.0;
                for l in 0..self.n {
                    if self.adj[a][l] {
                        pull += xi[a][p] - xi[l][p];
                    }
                }
                if self.adj[a][p] {
                    pull += xi[a][p] - x[p];
                }
                out[a][p] = xi[a][p] - pull / h;
            }
        }
        out
    }

    fn decisions(&self, eta: &[f64]) -> Vec<f64> {
        let le = self.lap(eta);
        (0..self.n).map(|a| self.holdings[a] - le[a]).collect()
    }

    fn special(&self, x: &[f64], eta: &[f64], xi: &[Vec<f64>], alpha: f64) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
        let own: Vec<f64> = (0..self.n).map(|a| self.grad(a, a, &xi[a])).collect();
        let lo = self.lap(&own);
        let eta: Vec<f64> = (0..self.n).map(|a| eta[a] + alpha * lo[a]).collect();
        let xi = self.estimate(xi, x);
        (self.decisions(&eta), eta, xi)
    }

    /// `psi[a][j]` tracks the coalition gradient with respect to member `j` of `a`'s coalition.
    #[allow(clippy::type_complexity)]
    fn general(
        &self,
        x: &[f64],
        eta: &[f64],
        xi: &[Vec<f64>],
        psi: &[Vec<f64>],
        beta: f64,
    ) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut eta = eta.to_vec();
        for a in 0..self.n {
            let team = &self.members[self.coalition[a]];
            let own_slot = team.iter().position(|&m| m == a).unwrap();
            for (j, &m) in team.iter().enumerate() {
                if self.intra(a, m) {
                    eta[a] += beta * (psi[a][own_slot] - psi[a][j]);
                }
            }
        }
        let new_xi = self.estimate(xi, x);
        let mut new_psi = psi.to_vec();
        for a in 0..self.n {
            let team = &self.members[self.coalition[a]];
            let ni = team.len() as f64;
            let intra_deg = team.iter().filter(|&&m| self.intra(a, m)).count() as f64;
            for (slot, &target) in team.iter().enumerate() {
                let mut v = (1.0 - intra_deg / ni) * psi[a][slot];
                for &m in team {
                    if self.intra(a, m) {
                        v += psi[m][slot] / ni;
                    }
                }
                v += self.grad(a, target, &new_xi[a]) - self.grad(a, target, &xi[a]);
                new_psi[a][slot] = v;
            }
        }
        (self.decisions(&eta), eta, new_xi, new_psi)
    }

    fn pseudo_gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|a| self.members[self.coalition[a]].iter().map(|&l| self.grad(l, a, x)).sum())
            .collect()
    }
}

fn agent_major(xi: &[Vec<f64>]) -> Vec<f64> {
    xi.concat()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(u, v)| (u - v).abs() <= tol * (1.0 + v.abs()))
}

#[test]
fn special_steps_match_scalar_oracle() {
    let game = case1();
    let o = Oracle::new(&game);
    let mut state = init_special(&game);
    let n = game.n_sum();
    let mut xi: Vec<Vec<f64>> = state.xi.chunks(n).map(<[f64]>::to_vec).collect();
    let (mut x, mut eta) = (state.x.clone(), state.eta.clone());
    for _ in 0..25 {
        state = step_special(&state, &game, 0.02).unwrap();
        (x, eta, xi) = o.special(&x, &eta, &xi, 0.02);
        assert!(close(&state.x, &x, 1e-12));
        assert!(close(&state.eta, &eta, 1e-12));
        assert!(close(&state.xi, &agent_major(&xi), 1e-12));
    }
}

#[test]
fn general_steps_match_scalar_oracle() {
    let game = case2();
    let o = Oracle::new(&game);
    let mut state = init_general(&game);
    let n = game.n_sum();
    let offsets = psi_offsets(game.topology());
    let mut xi: Vec<Vec<f64>> = state.xi.chunks(n).map(<[f64]>::to_vec).collect();
    let mut psi: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            o.members[o.coalition[a]].iter().map(|&t| o.grad(a, t, &xi[a])).collect()
        })
        .collect();
    assert!(close(&state.psi, &psi.concat(), 1e-14));
    let (mut x, mut eta) = (state.x.clone(), state.eta.clone());
    for _ in 0..25 {
        state = step_general(&state, &game, 0.01).unwrap();
        (x, eta, xi, psi) = o.general(&x, &eta, &xi, &psi, 0.01);
        assert!(close(&state.x, &x, 1e-12));
        assert!(close(&state.eta, &eta, 1e-12));
        assert!(close(&state.xi, &agent_major(&xi), 1e-12));
        for a in 0..n {
            assert!(close(&state.psi[offsets[a]..offsets[a + 1]], &psi[a], 1e-12));
        }
    }
}

#[test]
fn tracking_mean_identity_holds_along_run() {
    let game = case2();
    let mut state = init_general(&game);
    assert!(tracking_residual(&game, &state.xi, &state.psi) < 1e-12);
    for _ in 0..500 {
        state = step_general(&state, &game, 0.01).unwrap();
        assert!(tracking_residual(&game, &state.xi, &state.psi) < 1e-9);
    }
}

#[test]
fn estimation_error_recursion() {
    let game = case1();
    let t = game.topology();
    let m = t.consensus_operator_dense();
    let n = t.n_sum();
    let mut state = init_special(&game);
    for _ in 0..100 {
        let next = step_special(&state, &game, 0.02).unwrap();
        let e = estimation_error(t, &state.xi, &state.x);
        let predicted: Vec<f64> = m
            .matvec(&e)
            .iter()
            .enumerate()
            .map(|(k, v)| v - (next.x[k % n] - state.x[k % n]))
            .collect();
        let actual = estimation_error(t, &next.xi, &next.x);
        assert!(predicted.iter().zip(&actual).all(|(p, a)| (p - a).abs() < 1e-10));
        state = next;
    }
}

#[test]
fn coalition_sums_are_conserved() {
    for (game, alg, step) in [(case1(), Algorithm::Special, 0.02), (case2(), Algorithm::General, 0.01)] {
        let opts = RunOptions { max_iters: 20_000, log_stride: 1000, ..Default::default() };
        let traj = run(&game, alg, step, &opts, None).unwrap();
        assert!(traj.max_constraint_residual < 1e-9, "{}", traj.max_constraint_residual);
        assert!(traj.records.iter().all(|r| r.constraint_residual < 1e-9));
    }
}

#[test]
fn runs_are_deterministic() {
    let game = case2();
    let opts = RunOptions { max_iters: 3000, log_stride: 10, ..Default::default() };
    let a = run(&game, Algorithm::General, 0.01, &opts, None).unwrap();
    let b = run(&game, Algorithm::General, 0.01, &opts, None).unwrap();
    assert_eq!(a, b);
    let bits = |t: &Trajectory| t.final_x().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn stop_tolerance_controls_iteration_count() {
    let game = case1();
    let opts = RunOptions { max_iters: 777, stop_tol: f64::INFINITY, ..Default::default() };
    let t = run(&game, Algorithm::Special, 0.02, &opts, None).unwrap();
    assert_eq!(t.iterations, 777);
    assert!(!t.stopped_early);
    let opts = RunOptions { max_iters: 50_000, stop_tol: 1e-6, log_stride: 100, ..Default::default() };
    let t = run(&game, Algorithm::Special, 0.02, &opts, None).unwrap();
    assert!(t.stopped_early && t.iterations < 50_000);
    let last = &t.records[t.records.len() - 1];
    assert_eq!(last.k, t.iterations);
}

#[test]
fn record_count_follows_stride() {
    let game = case1();
    for (iters, stride) in [(1000usize, 7usize), (1000, 10), (5, 1), (0, 3)] {
        let opts = RunOptions { max_iters: iters, log_stride: stride, ..Default::default() };
        let t = run(&game, Algorithm::Special, 0.02, &opts, None).unwrap();
        assert_eq!(t.records.len(), iters.div_ceil(stride) + 1);
        assert!(t.records.windows(2).all(|w| w[0].k < w[1].k));
    }
}

#[test]
fn single_coalition_run_reaches_equilibrium() {
    let t = NetworkTopology::from_flat_edges(&[4], &[(0, 1), (1, 2), (2, 3)]).unwrap();
    let objectives = [10.0, 20.0, 30.0, 40.0]
        .iter()
        .enumerate()
        .map(|(a, b)| QuadraticObjective::decoupled(a, 4, 1.0, *b).into())
        .collect();
    let game = Game::new(Arc::new(t), objectives, vec![25.0; 4], vec![100.0]).unwrap();
    let ne = solve_ne(&game, 1e-9).unwrap();
    for alg in [Algorithm::Special, Algorithm::General] {
        let opts = RunOptions { max_iters: 20_000, log_stride: 20_000, ..Default::default() };
        let traj = run(&game, alg, 0.02, &opts, None).unwrap();
        let d: f64 = traj.final_x().iter().zip(&ne.x_star).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(d < 1e-8, "{alg}: {d}");
    }
}

#[test]
fn lyapunov_vanishes_at_equilibrium() {
    let game = case2();
    let ne = solve_ne(&game, 1e-12).unwrap();
    let t = game.topology();
    let n = t.n_sum();
    let xi: Vec<f64> = (0..n * n).map(|k| ne.x_star[k % n]).collect();
    let offsets = psi_offsets(t);
    let mut psi = vec![0.0; offsets[n]];
    for a in 0..n {
        let range = t.coalition_range(t.coalition_of(a));
        let size = range.len() as f64;
        for (slot, target) in range.clone().enumerate() {
            psi[offsets[a] + slot] = range.clone().map(|l| game.agent_partial(l, target, &ne.x_star)).sum::<f64>() / size;
        }
    }
    let state = AlgorithmState::General(GeneralCaseState { k: 0, x: ne.x_star.clone(), eta: vec![0.0; n], xi: xi.clone(), psi });
    let cert = certify(&game, Algorithm::General).unwrap();
    let v = lyapunov_values(&state, &game, &cert).unwrap();
    assert!(v.total < 1e-18, "{v:?}");

    let game = case1();
    let ne = solve_ne(&game, 1e-12).unwrap();
    let xi: Vec<f64> = (0..n * n).map(|k| ne.x_star[k % n]).collect();
    let state = AlgorithmState::Special(SpecialCaseState { k: 0, x: ne.x_star.clone(), eta: vec![0.0; n], xi });
    let cert = certify(&game, Algorithm::Special).unwrap();
    assert!(lyapunov_values(&state, &game, &cert).unwrap().total < 1e-18);
}

#[test]
fn gradient_lyapunov_at_start_matches_oracle() {
    for game in [case1(), case2()] {
        let o = Oracle::new(&game);
        let lp = o.lap(&o.pseudo_gradient(game.holdings()));
        let expected: f64 = lp.iter().map(|v| v * v).sum();
        let alg = if game.kind() == GameKind::Special { Algorithm::Special } else { Algorithm::General };
        let cert = certify(&game, alg).unwrap();
        let v = lyapunov_values(&AlgorithmState::init(&game, alg), &game, &cert).unwrap();
        assert!((v.v_x - expected).abs() <= 1e-10 * expected);
        assert!(v.v_xi > 0.0);
    }
}

#[test]
fn certified_step_descends() {
    for (game, alg) in [(case1(), Algorithm::Special), (case2(), Algorithm::General)] {
        let cert = certify(&game, alg).unwrap();
        let opts = RunOptions { max_iters: 5000, log_stride: 5000, monitor_descent: true, ..Default::default() };
        let traj = run(&game, alg, cert.bound, &opts, Some(&cert)).unwrap();
        let d = traj.descent.unwrap();
        assert!(d.strictly_decreasing(), "{d:?}");
        assert_eq!(d.checked, 5000);
        assert!(d.final_value < d.initial_value);
        assert!(d.max_ratio < 1.0);
        assert_eq!(traj.step_exceeds_certificate, Some(false));
    }
}

#[test]
fn certificate_mode_mismatch_is_rejected() {
    let game = case1();
    let cert = certify(&game, Algorithm::Special).unwrap();
    let state = AlgorithmState::init(&game, Algorithm::General);
    assert!(matches!(lyapunov_values(&state, &game, &cert), Err(Error::InvalidArgument(_))));
    let opts = RunOptions { max_iters: 10, monitor_descent: true, ..Default::default() };
    assert!(run(&game, Algorithm::General, 0.01, &opts, Some(&cert)).is_err());
}

#[test]
fn state_layouts() {
    let game = case2();
    let s = init_general(&game);
    assert_eq!(s.xi.len(), 225);
    assert_eq!(s.psi.len(), 4 * 4 + 5 * 5 + 6 * 6);
    let offsets = psi_offsets(game.topology());
    assert_eq!(&offsets[..6], &[0, 4, 8, 12, 16, 21]);
    assert_eq!(init_special(&game).xi.len(), 225);
}

#[test]
fn invalid_run_options_are_rejected() {
    let game = case1();
    let bad_stride = RunOptions { log_stride: 0, ..Default::default() };
    assert!(run(&game, Algorithm::Special, 0.02, &bad_stride, None).is_err());
    let bad_ne = RunOptions { oracle_ne: Some(vec![0.0; 3]), ..Default::default() };
    assert!(run(&game, Algorithm::Special, 0.02, &bad_ne, None).is_err());
    assert!(run(&game, Algorithm::Special, f64::INFINITY, &RunOptions::default(), None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn resources_conserved_for_any_small_step(alpha in 0.0f64..0.05, steps in 1usize..60, general in any::<bool>()) {
        let (game, alg) = if general { (case2(), Algorithm::General) } else { (case1(), Algorithm::Special) };
        let mut s = AlgorithmState::init(&game, alg);
        for _ in 0..steps {
            s = s.step(&game, alpha).unwrap();
            prop_assert!(game.constraint_residual(s.x()) < 1e-9);
        }
        prop_assert_eq!(s.k(), steps);
    }

    #[test]
    fn estimates_of_known_neighbours_start_exact(general in any::<bool>()) {
        let game = if general { case2() } else { case1() };
        let alg = if general { Algorithm::General } else { Algorithm::Special };
        let s = AlgorithmState::init(&game, alg);
        let e = estimation_error(game.topology(), s.xi(), s.x());
        let n = game.n_sum();
        for a in 0..n {
            prop_assert_eq!(e[a * n + a], 0.0);
            for &p in game.topology().neighbors(a) {
                prop_assert_eq!(e[a * n + p], 0.0);
            }
        }
    }
}
