use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use rxtx_core::discovery::{
    cover_to_scheme, discover, enumerate_relations, sample_candidates, select_minimal_cover, xxt_targets,
    CandidateProduct, CoverOptions, DiscoveryConfig, RelationOptions, SamplingMode, TargetSet,
};
use rxtx_core::scheme::Algebra;
use rxtx_core::{export_scheme, import_scheme, verify_scheme, Error};

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn e(i: usize) -> Vec<i8> {
    let mut v = vec![0; 4];
    v[i] = 1;
    v
}

/// Distinct symmetric matrices αβᵗ + βαᵗ up to sign, counted without the
/// library's monomial encoding.
fn oracle_distinct_forms() -> usize {
    let vecs: Vec<[i64; 4]> = (0..81)
        .map(|mut c| {
            let mut v = [0i64; 4];
            for x in v.iter_mut() {
                *x = c % 3 - 1;
                c /= 3;
            }
            v
        })
        .filter(|v| v.iter().any(|&x| x != 0))
        .collect();
    let mut set = BTreeSet::new();
    for a in &vecs {
        for b in &vecs {
            let m: Vec<i64> = (0..16).map(|k| a[k / 4] * b[k % 4] + a[k % 4] * b[k / 4]).collect();
            let neg: Vec<i64> = m.iter().map(|x| -x).collect();
            set.insert(m.clone().max(neg));
        }
    }
    set.len()
}

#[test]
fn exhaustive_pool() {
    let pool = sample_candidates(2, SamplingMode::Exhaustive).unwrap();
    assert_eq!(pool.drawn, 6400);
    assert_eq!(pool.candidates.len(), oracle_distinct_forms());
    assert!(pool.candidates.len() < 6400);
}

#[test]
fn symmetric_form_halves_cross_terms() {
    let c = CandidateProduct::new(e(0), e(2));
    let s = c.symmetric_form();
    assert_eq!(s[0][2], r(1, 2));
    assert_eq!(s[2][0], r(1, 2));
    let nonzero = s.iter().flatten().filter(|v| **v != r(0, 1)).count();
    assert_eq!(nonzero, 2);
}

#[test]
fn random_pool_is_seeded() {
    let mode = SamplingMode::Random { count: 500, seed: 42 };
    let a = sample_candidates(2, mode).unwrap();
    let b = sample_candidates(2, mode).unwrap();
    assert_eq!(a.candidates, b.candidates);
    let c = sample_candidates(2, SamplingMode::Random { count: 500, seed: 43 }).unwrap();
    assert_ne!(a.candidates, c.candidates);
    assert!(sample_candidates(3, SamplingMode::Exhaustive).is_err());
}

#[test]
fn relation_examples() {
    let targets = TargetSet::from_entries(2, &[(0, 0)]).unwrap();
    let squares = vec![CandidateProduct::new(e(0), e(0)), CandidateProduct::new(e(1), e(1))];
    let rel = enumerate_relations(&squares, &targets, RelationOptions::default()).unwrap();
    assert_eq!(rel.len(), 1);
    assert_eq!(rel[0].terms, vec![(0, r(1, 1)), (1, r(1, 1))]);

    let cross = vec![CandidateProduct::new(vec![1, 1, 0, 0], vec![1, 1, 0, 0])];
    assert!(enumerate_relations(&cross, &targets, RelationOptions::default()).unwrap().is_empty());
}

#[test]
fn every_target_has_a_relation_and_each_expands_exactly() {
    let pool = sample_candidates(2, SamplingMode::Exhaustive).unwrap();
    let targets = xxt_targets(2);
    let rel = enumerate_relations(&pool.candidates, &targets, RelationOptions::default()).unwrap();
    for t in 0..3 {
        assert!(rel.iter().any(|x| x.target == t), "no relation for {}", targets.name(t));
    }
    for x in &rel {
        let mut sum = vec![r(0, 1); 10];
        for (i, c) in &x.terms {
            assert_ne!(*c, r(0, 1));
            for (s, &f) in sum.iter_mut().zip(&pool.candidates[*i].form) {
                *s += c * r(f, 1);
            }
        }
        let want: Vec<BigRational> = targets.forms[x.target].iter().map(|&v| r(v, 1)).collect();
        assert_eq!(sum, want);
    }
    // (x1 + x2)(x3 + x4) + (x1 − x2)(x3 − x4) = 2(x1x3 + x2x4)
    let p = pool.candidates.iter().position(|c| c.form == CandidateProduct::new(vec![1, 1, 0, 0], vec![0, 0, 1, 1]).form);
    let q = pool.candidates.iter().position(|c| c.form == CandidateProduct::new(vec![1, -1, 0, 0], vec![0, 0, 1, -1]).form);
    let (p, q) = (p.unwrap(), q.unwrap());
    let pair = rel.iter().find(|x| x.target == 1 && x.terms.iter().map(|t| t.0).collect::<Vec<_>>() == vec![p.min(q), p.max(q)]);
    assert_eq!(pair.unwrap().terms.iter().map(|t| t.1.clone()).collect::<Vec<_>>(), vec![r(1, 2), r(1, 2)]);
}

#[test]
fn diagonal_targets_need_at_most_four() {
    let pool = sample_candidates(2, SamplingMode::Exhaustive).unwrap();
    let targets = TargetSet::from_entries(2, &[(0, 0), (1, 1)]).unwrap();
    let cover = select_minimal_cover(&pool.candidates, &targets, CoverOptions::default()).unwrap();
    assert!(cover.len() <= 4);
    assert!(cover_to_scheme(&cover, &targets).is_err());
}

#[test]
fn naive_products_give_cover_of_six() {
    let naive = vec![
        CandidateProduct::new(e(0), e(0)),
        CandidateProduct::new(e(1), e(1)),
        CandidateProduct::new(e(2), e(2)),
        CandidateProduct::new(e(3), e(3)),
        CandidateProduct::new(e(0), e(2)),
        CandidateProduct::new(e(1), e(3)),
    ];
    let targets = xxt_targets(2);
    let cover = select_minimal_cover(&naive, &targets, CoverOptions::default()).unwrap();
    assert_eq!(cover.len(), 6);
    assert!(verify_scheme(&cover_to_scheme(&cover, &targets).unwrap()).unwrap().is_ok());
    let short = &naive[..5];
    assert!(matches!(
        select_minimal_cover(short, &targets, CoverOptions::default()),
        Err(Error::Infeasible(_))
    ));
}

/// Exact rank of integer vectors by fraction-free elimination.
fn int_rank(mut rows: Vec<Vec<i128>>) -> usize {
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..width {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][c] != 0) else { continue };
        rows.swap(rank, p);
        for i in rank + 1..rows.len() {
            let (a, b) = (rows[rank][c], rows[i][c]);
            if b != 0 {
                let pivot = rows[rank].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot) {
                    *x = *x * a - y * b;
                }
                let g = rows[i].iter().fold(0i128, |g, &v| num_integer::gcd(g, v));
                if g > 1 {
                    rows[i].iter_mut().for_each(|v| *v /= g);
                }
            }
        }
        rank += 1;
    }
    rank
}

#[test]
fn minimal_cover_is_five_and_four_is_impossible() {
    let d = discover(&DiscoveryConfig::default()).unwrap();
    assert_eq!(d.distinct, 820);
    assert_eq!(d.cover.len(), 5);
    assert_eq!(d.scheme.algebra, Algebra::Commutative);
    assert!(verify_scheme(&d.scheme).unwrap().is_ok());

    // Any 4-product cover spans T + ⟨p⟩ for one of its products p; check
    // every candidate p directly.
    let pool = sample_candidates(2, SamplingMode::Exhaustive).unwrap();
    let t: Vec<Vec<i128>> = xxt_targets(2).forms.iter().map(|f| f.iter().map(|&v| v as i128).collect()).collect();
    let as128 = |c: &CandidateProduct| c.form.iter().map(|&v| v as i128).collect::<Vec<_>>();
    for p in &pool.candidates {
        let mut space = t.clone();
        space.push(as128(p));
        let dim = int_rank(space.clone());
        let members: Vec<Vec<i128>> = pool
            .candidates
            .iter()
            .map(as128)
            .filter(|q| {
                let mut s = space.clone();
                s.push(q.clone());
                int_rank(s) == dim
            })
            .collect();
        assert!(dim < 4 || int_rank(members) < 4, "4-cover through {p}");
    }
}

#[test]
fn discovered_scheme_round_trips() {
    let d = discover(&DiscoveryConfig::default()).unwrap();
    let text = export_scheme(&d.scheme);
    let back = import_scheme(&text).unwrap();
    assert_eq!(back, d.scheme);
    assert_eq!(discover(&DiscoveryConfig::default()).unwrap().scheme, d.scheme);
}

#[test]
fn larger_search_respects_budget() {
    let cfg = DiscoveryConfig {
        dim: 3,
        mode: SamplingMode::Random { count: 300, seed: 1 },
        cover: CoverOptions { max_products: 30, budget: 50 },
    };
    assert!(matches!(discover(&cfg), Err(Error::BudgetExhausted(50))));
}
