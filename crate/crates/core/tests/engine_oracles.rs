//! Engine results checked against independent oracles: a dense forward
//! power iteration, a dense direct linear solve, and exact values computed
//! separately with rational arithmetic and frozen here as literals.

use tagchain_core::dtmc::analysis::{
    prob_bounded_until, prob_next, prob_until, reward_cumulative, reward_instantaneous,
    reward_reachability, reward_steady_state, transient_distribution, SolveOptions,
};
use tagchain_core::rng::SplitMix64;
use tagchain_core::{Dtmc64, Rewards64};

const TOL: f64 = 1e-9;

fn opts() -> SolveOptions<f64> {
    SolveOptions::default()
}

/// Transition matrix as a dense row-major array.
fn dense(d: &Dtmc64) -> Vec<Vec<f64>> {
    let n = d.n_states();
    let mut p = vec![vec![0.0; n]; n];
    for s in 0..n {
        for &(to, q) in d.row(s) {
            p[s][to] += q;
        }
    }
    p
}

fn forward(p: &[Vec<f64>], dist: &[f64]) -> Vec<f64> {
    let n = p.len();
    let mut out = vec![0.0; n];
    for s in 0..n {
        if dist[s] != 0.0 {
            for to in 0..n {
                out[to] += dist[s] * p[s][to];
            }
        }
    }
    out
}

fn unit(n: usize, at: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[at] = 1.0;
    v
}

/// Rewires a dense matrix so every state in `hold` keeps its mass.
fn absorb(p: &mut [Vec<f64>], hold: impl Fn(usize) -> bool) {
    for s in 0..p.len() {
        if hold(s) {
            for v in p[s].iter_mut() {
                *v = 0.0;
            }
            p[s][s] = 1.0;
        }
    }
}

/// `P(a U b)` from every state, by pushing mass through a dense copy with
/// `b` and `¬a` made absorbing.
fn oracle_until(d: &Dtmc64, a: &[bool], b: &[bool], steps: u64) -> Vec<f64> {
    let n = d.n_states();
    let mut p = dense(d);
    absorb(&mut p, |s| b[s] || !a[s]);
    (0..n)
        .map(|from| {
            let mut dist = unit(n, from);
            for _ in 0..steps {
                dist = forward(&p, &dist);
            }
            (0..n).filter(|&s| b[s]).map(|s| dist[s]).sum()
        })
        .collect()
}

/// Same transformation stopped at exactly `t` steps.
fn oracle_bounded_until(d: &Dtmc64, a: &[bool], b: &[bool], t: u64) -> Vec<f64> {
    let n = d.n_states();
    let mut p = dense(d);
    absorb(&mut p, |s| b[s] || !a[s]);
    (0..n)
        .map(|from| {
            let mut dist = unit(n, from);
            for _ in 0..t {
                dist = forward(&p, &dist);
            }
            (0..n).filter(|&s| b[s]).map(|s| dist[s]).sum()
        })
        .collect()
}

/// Expected one-step gain per state, from the reward accessors directly.
fn gains(d: &Dtmc64, r: &Rewards64) -> Vec<f64> {
    (0..d.n_states())
        .map(|s| {
            r.state_reward(s)
                + d.row(s)
                    .iter()
                    .map(|&(to, p)| p * r.transition_reward(s, to))
                    .sum::<f64>()
        })
        .collect()
}

/// Expected reward accumulated before first reaching `target`, by forward
/// accumulation with `target` absorbing and its gain zeroed.
fn oracle_reach_reward(d: &Dtmc64, r: &Rewards64, target: &[bool], steps: u64) -> Vec<f64> {
    let n = d.n_states();
    let mut p = dense(d);
    absorb(&mut p, |s| target[s]);
    let mut g = gains(d, r);
    for s in 0..n {
        if target[s] {
            g[s] = 0.0;
        }
    }
    (0..n)
        .map(|from| {
            let mut dist = unit(n, from);
            let mut acc = 0.0;
            for _ in 0..steps {
                acc += dist.iter().zip(&g).map(|(x, y)| x * y).sum::<f64>();
                dist = forward(&p, &dist);
            }
            acc
        })
        .collect()
}

/// Stationary distribution by long power iteration.
fn oracle_steady(d: &Dtmc64, steps: u64) -> Vec<f64> {
    let p = dense(d);
    let mut dist = unit(d.n_states(), d.initial());
    for _ in 0..steps {
        dist = forward(&p, &dist);
    }
    dist
}

/// `P(a U b)` again, this time by Gaussian elimination on the full linear
/// system, with the sure and impossible states classified by the forward
/// oracle.
fn oracle_until_dense_solve(d: &Dtmc64, a: &[bool], b: &[bool]) -> Vec<f64> {
    let n = d.n_states();
    let mass = oracle_until(d, a, b, 200_000);
    let p = dense(d);
    let mut m = vec![vec![0.0; n + 1]; n];
    for s in 0..n {
        if mass[s] > 1.0 - 1e-9 {
            m[s][s] = 1.0;
            m[s][n] = 1.0;
        } else if mass[s] < 1e-9 {
            m[s][s] = 1.0;
        } else {
            for to in 0..n {
                m[s][to] = -p[s][to];
            }
            m[s][s] += 1.0;
        }
    }
    for c in 0..n {
        let pivot = (c..n)
            .max_by(|&x, &y| m[x][c].abs().partial_cmp(&m[y][c].abs()).unwrap())
            .unwrap();
        m.swap(c, pivot);
        let lead = m[c][c];
        assert!(lead.abs() > 1e-12, "singular system");
        for v in m[c].iter_mut() {
            *v /= lead;
        }
        for r in 0..n {
            if r != c && m[r][c] != 0.0 {
                let f = m[r][c];
                for col in 0..=n {
                    m[r][col] -= f * m[c][col];
                }
            }
        }
    }
    (0..n).map(|s| m[s][n]).collect()
}

fn assert_close(got: &[f64], want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len());
    for (i, (&g, &w)) in got.iter().zip(want).enumerate() {
        assert!((g - w).abs() <= tol, "index {i}: got {g}, want {w}");
    }
}

/// Birth–death walk on 0..=5 with both ends absorbing; interior states step
/// down with 7/20, stay with 1/4, and step up with 2/5.
fn bd() -> (Dtmc64, Rewards64) {
    let mut d = Dtmc64::new(6, 2);
    d.add(0, 0, 1.0);
    d.add(5, 5, 1.0);
    for s in 1..5 {
        d.add(s, s - 1, 0.35);
        d.add(s, s, 0.25);
        d.add(s, s + 1, 0.4);
    }
    d.add_label("lo", [0]);
    d.add_label("hi", [5]);
    d.add_label("done", [0, 5]);
    let mut steps = Rewards64::new(6);
    for s in 1..5 {
        steps.set_state_reward(s, 1.0);
    }
    (d, steps)
}

/// Reflected walk on 0..=3, irreducible and aperiodic; up 9/20, down 3/10,
/// the rest stays. `pos` rewards the position, `moves` puts a transition
/// reward of one on every non-loop edge.
fn cycle() -> (Dtmc64, Rewards64, Rewards64) {
    let mut d = Dtmc64::new(4, 0);
    d.add(0, 0, 0.55);
    d.add(0, 1, 0.45);
    for s in 1..3 {
        d.add(s, s - 1, 0.3);
        d.add(s, s, 0.25);
        d.add(s, s + 1, 0.45);
    }
    d.add(3, 2, 0.3);
    d.add(3, 3, 0.7);
    let mut pos = Rewards64::new(4);
    for s in 0..4 {
        pos.set_state_reward(s, s as f64);
    }
    let mut moves = Rewards64::new(4);
    for s in 0..4 {
        for &(to, _) in d.row(s) {
            if to != s {
                moves.add_transition_reward(s, to, 1.0);
            }
        }
    }
    (d, pos, moves)
}

fn vec_of(d: &Dtmc64, label: &str) -> Vec<bool> {
    d.label_vector(label).unwrap()
}

#[test]
fn until_probability_matches_dense_oracles_and_hand_values() {
    let (d, _) = bd();
    let a: Vec<bool> = vec_of(&d, "lo").iter().map(|&x| !x).collect();
    let b = vec_of(&d, "hi");
    let engine = prob_until(&d, &a, &b, &opts()).unwrap();

    // Exact values 4096/15961, 7680/15961, 10816/15961, 13560/15961.
    let frozen = [
        0.0,
        0.256_625_524_716_496_47,
        0.481_172_858_843_430_86,
        0.677_651_776_204_498_5,
        0.849_570_828_895_432_6,
        1.0,
    ];
    assert_close(&engine, &frozen, 1e-8);
    assert_close(&oracle_until(&d, &a, &b, 5_000), &frozen, TOL);
    assert_close(&oracle_until_dense_solve(&d, &a, &b), &frozen, 1e-7);
}

#[test]
fn bounded_until_matches_dense_oracle_and_hand_value() {
    let (d, _) = bd();
    let a: Vec<bool> = vec_of(&d, "lo").iter().map(|&x| !x).collect();
    let b = vec_of(&d, "hi");
    let engine = prob_bounded_until(&d, &a, &b, 10);

    // Exactly 332993517/10^9 from the initial state.
    assert!((engine[d.initial()] - 0.332_993_517).abs() <= TOL);
    assert_close(&engine, &oracle_bounded_until(&d, &a, &b, 10), TOL);
    assert_eq!(prob_bounded_until(&d, &a, &b, 0)[d.initial()], 0.0);
}

#[test]
fn absorption_time_matches_oracle_and_hand_values() {
    let (d, steps) = bd();
    let done = vec_of(&d, "done");
    let engine = reward_reachability(&d, &steps, &done, &opts()).unwrap();

    // Exact values 90380/15961, 129560/15961, 123940/15961, 79120/15961.
    let frozen = [
        0.0,
        5.662_552_471_649_646,
        8.117_285_884_343_087,
        7.765_177_620_449_847,
        4.957_082_889_543_262,
        0.0,
    ];
    assert_close(&engine, &frozen, 1e-8);
    assert_close(&engine, &oracle_reach_reward(&d, &steps, &done, 5_000), 1e-8);
}

#[test]
fn next_probability_is_one_step_target_mass() {
    let (d, _) = bd();
    let mut target = vec![false; 6];
    target[3] = true;
    let engine = prob_next(&d, &target);
    assert_close(&engine, &[0.0, 0.0, 0.4, 0.25, 0.35, 0.0], TOL);
}

#[test]
fn reaching_an_uncertain_target_costs_infinitely_much() {
    let (d, steps) = bd();
    let hi = vec_of(&d, "hi");
    let engine = reward_reachability(&d, &steps, &hi, &opts()).unwrap();
    for s in 0..5 {
        assert!(engine[s].is_infinite(), "state {s} misses the target with positive probability");
    }
    assert_eq!(engine[5], 0.0);
}

#[test]
fn steady_state_rewards_match_power_iteration_and_hand_values() {
    let (d, pos, moves) = cycle();
    let o = opts();

    // π = (8, 12, 18, 27)/65; Σ π(s)·s = 129/65; move rate 171/325. The
    // solver bounds the error on π, so reward sums see it scaled by the
    // gain magnitudes.
    let engine_pos = reward_steady_state(&d, &pos, &o).unwrap();
    assert!((engine_pos - 1.984_615_384_615_384_7).abs() <= 1e-7);
    let engine_moves = reward_steady_state(&d, &moves, &o).unwrap();
    assert!((engine_moves - 0.526_153_846_153_846_2).abs() <= 1e-7);

    let pi = oracle_steady(&d, 20_000);
    assert_close(&pi, &[8.0 / 65.0, 12.0 / 65.0, 18.0 / 65.0, 27.0 / 65.0], TOL);
    let oracle_pos: f64 = pi.iter().zip(gains(&d, &pos)).map(|(p, g)| p * g).sum();
    assert!((engine_pos - oracle_pos).abs() <= 1e-7);
}

#[test]
fn instantaneous_reward_matches_forward_oracle_and_hand_value() {
    let (d, pos, _) = cycle();
    let engine = reward_instantaneous(&d, &pos, 7);

    // Exactly 105864723/64000000 from state 0.
    assert!((engine[0] - 1.654_136_296_875).abs() <= TOL);
    let dist = {
        let p = dense(&d);
        let mut v = unit(4, 0);
        for _ in 0..7 {
            v = forward(&p, &v);
        }
        v
    };
    let oracle: f64 = dist.iter().zip(pos.state_rewards()).map(|(p, r)| p * r).sum();
    assert!((engine[0] - oracle).abs() <= TOL);
}

#[test]
fn cumulative_reward_matches_forward_oracle_and_hand_values() {
    let (d, pos, moves) = cycle();

    // Exact: 314962837734123/2048·10^10 and 5497267050117441/8192·10^11.
    let engine_pos = reward_cumulative(&d, &pos, 12);
    assert!((engine_pos[0] - 15.379_044_811_236_474).abs() <= TOL);
    let engine_moves = reward_cumulative(&d, &moves, 12);
    assert!((engine_moves[0] - 6.710_531_067_037_892).abs() <= TOL);

    let p = dense(&d);
    for (r, engine) in [(&pos, &engine_pos), (&moves, &engine_moves)] {
        let g = gains(&d, r);
        let mut dist = unit(4, 0);
        let mut acc = 0.0;
        for _ in 0..12 {
            acc += dist.iter().zip(&g).map(|(x, y)| x * y).sum::<f64>();
            dist = forward(&p, &dist);
        }
        assert!((engine[0] - acc).abs() <= TOL);
    }
}

#[test]
fn transient_distribution_matches_dense_forward_multiply() {
    let (d, _, _) = cycle();
    let engine = transient_distribution(&d, 13);
    let p = dense(&d);
    let mut dist = unit(4, 0);
    for _ in 0..13 {
        dist = forward(&p, &dist);
    }
    assert_close(&engine, &dist, 1e-12);
    assert!((engine.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
}

/// A reproducible random chain with labels and rewards, dense enough to mix
/// but sparse enough to keep structure interesting.
fn random_chain(rng: &mut SplitMix64, max_states: usize) -> (Dtmc64, Rewards64) {
    let n = 2 + (rng.next_u64() as usize) % (max_states - 1);
    let mut d = Dtmc64::new(n, 0);
    for s in 0..n {
        let fanout = 1 + (rng.next_u64() as usize) % 3.min(n);
        let targets: Vec<usize> = (0..fanout).map(|_| (rng.next_u64() as usize) % n).collect();
        let weights: Vec<f64> = (0..fanout).map(|_| 0.1 + rng.next_f64()).collect();
        let total: f64 = weights.iter().sum();
        for (&to, w) in targets.iter().zip(&weights) {
            d.add(s, to, w / total);
        }
    }
    let a: Vec<usize> = (0..n).filter(|_| rng.next_f64() < 0.6).collect();
    let b: Vec<usize> = (0..n).filter(|_| rng.next_f64() < 0.25).collect();
    d.add_label("a", a);
    d.add_label("b", b);
    let mut r = Rewards64::new(n);
    for s in 0..n {
        r.set_state_reward(s, (rng.next_u64() % 4) as f64);
        for &(to, _) in d.row(s).to_vec().iter() {
            if rng.next_f64() < 0.3 {
                r.add_transition_reward(s, to, 1.0 + rng.next_f64());
            }
        }
    }
    (d, r)
}

#[test]
fn engines_agree_with_oracles_on_a_random_corpus() {
    let mut rng = SplitMix64::new(0xfeed);
    let o = opts();
    let mut untils = 0;
    for _case in 0..25 {
        let (d, r) = random_chain(&mut rng, 20);
        let n = d.n_states();
        let a = d.label_vector("a").unwrap();
        let b = d.label_vector("b").unwrap();
        let all = vec![true; n];

        assert_close(&prob_next(&d, &b), &{
            let p = dense(&d);
            (0..n)
                .map(|s| (0..n).filter(|&t| b[t]).map(|t| p[s][t]).sum())
                .collect::<Vec<f64>>()
        }, TOL);

        for t in [5, 25] {
            assert_close(
                &prob_bounded_until(&d, &a, &b, t),
                &oracle_bounded_until(&d, &a, &b, t),
                TOL,
            );
        }

        let until = prob_until(&d, &a, &b, &o).unwrap();
        assert_close(&until, &oracle_until(&d, &a, &b, 200_000), 1e-7);
        let reach = prob_until(&d, &all, &b, &o).unwrap();
        assert_close(&reach, &oracle_until(&d, &all, &b, 200_000), 1e-7);
        if n <= 8 {
            assert_close(&until, &oracle_until_dense_solve(&d, &a, &b), 1e-7);
            untils += 1;
        }

        let inst = reward_instantaneous(&d, &r, 4);
        let cum8 = reward_cumulative(&d, &r, 8);
        let cum20 = reward_cumulative(&d, &r, 20);
        let p = dense(&d);
        let g = gains(&d, &r);
        for from in 0..n {
            let mut dist = unit(n, from);
            let mut acc = 0.0;
            let mut acc8 = None;
            for t in 0..20 {
                if t == 4 {
                    let got: f64 =
                        dist.iter().zip(r.state_rewards()).map(|(x, y)| x * y).sum();
                    assert!((inst[from] - got).abs() <= TOL);
                }
                if t == 8 {
                    acc8 = Some(acc);
                }
                acc += dist.iter().zip(&g).map(|(x, y)| x * y).sum::<f64>();
                dist = forward(&p, &dist);
            }
            assert!((cum8[from] - acc8.unwrap()).abs() <= TOL);
            assert!((cum20[from] - acc).abs() <= TOL);
        }

        let mass = oracle_until(&d, &all, &b, 200_000);
        let rr = reward_reachability(&d, &r, &b, &o).unwrap();
        let oracle_rr = oracle_reach_reward(&d, &r, &b, 200_000);
        for s in 0..n {
            if mass[s] > 1.0 - 1e-10 {
                assert!(
                    (rr[s] - oracle_rr[s]).abs() <= 1e-6 * (1.0 + oracle_rr[s].abs()),
                    "state {s}: got {}, oracle {}",
                    rr[s],
                    oracle_rr[s]
                );
            } else if mass[s] < 1.0 - 1e-6 {
                assert!(rr[s].is_infinite(), "state {s} should cost infinitely much");
            }
        }

        let engine_dist = transient_distribution(&d, 6);
        let mut dist = unit(n, d.initial());
        for _ in 0..6 {
            dist = forward(&p, &dist);
        }
        assert_close(&engine_dist, &dist, 1e-12);
    }
    assert!(untils >= 5, "corpus never produced small chains for the dense solve");
}
