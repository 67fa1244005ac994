//! Compressed words against an explicit model.

use ltw::word::{Length, SlpPool, WordRef};
use ltw::EqualityMode;
use proptest::prelude::*;

#[derive(Clone, Debug)]
enum Op {
    Literal(Vec<u8>),
    Concat(usize, usize),
    StripPrefix(usize, usize),
    StripSuffix(usize, usize),
    Prefix(usize, usize),
    Suffix(usize, usize),
    Rotate(usize, usize),
    Reverse(usize),
    Power(usize, usize),
    Root(usize),
}

fn op() -> impl Strategy<Value = Op> {
    let i = 0..64usize;
    let n = 0..40usize;
    prop_oneof![
        prop::collection::vec(prop::sample::select(b"ab".to_vec()), 0..6).prop_map(Op::Literal),
        (i.clone(), i.clone()).prop_map(|(a, b)| Op::Concat(a, b)),
        (i.clone(), n.clone()).prop_map(|(a, k)| Op::StripPrefix(a, k)),
        (i.clone(), n.clone()).prop_map(|(a, k)| Op::StripSuffix(a, k)),
        (i.clone(), n.clone()).prop_map(|(a, k)| Op::Prefix(a, k)),
        (i.clone(), n.clone()).prop_map(|(a, k)| Op::Suffix(a, k)),
        (i.clone(), 0..200usize).prop_map(|(a, k)| Op::Rotate(a, k)),
        i.clone().prop_map(Op::Reverse),
        (i.clone(), 0..5usize).prop_map(|(a, k)| Op::Power(a, k)),
        i.prop_map(Op::Root),
    ]
}

fn model_root(s: &[u8]) -> &[u8] {
    let n = s.len();
    (1..=n)
        .find(|&d| n % d == 0 && s.chunks(d).all(|c| c == &s[..d]))
        .map_or(s, |d| &s[..d])
}

/// Runs `ops` on a pool and on explicit words side by side.
fn run(ops: &[Op], pool: &mut SlpPool) -> Vec<(WordRef, Vec<u8>)> {
    let mut words = vec![(pool.empty(), Vec::new())];
    for op in ops {
        let pick = |i: usize| words[i % words.len()].clone();
        let next = match op {
            Op::Literal(s) => (pool.literal(s), s.clone()),
            Op::Concat(a, b) => {
                let ((x, xs), (y, ys)) = (pick(*a), pick(*b));
                (pool.concat(x, y), [xs, ys].concat())
            }
            Op::StripPrefix(a, k) | Op::StripSuffix(a, k) | Op::Prefix(a, k) | Op::Suffix(a, k) => {
                let (x, xs) = pick(*a);
                let k = k % (xs.len() + 1);
                let n = Length::from(k);
                let m = xs.len();
                match op {
                    Op::StripPrefix(..) => (pool.strip_prefix(x, &n).unwrap(), xs[k..].to_vec()),
                    Op::StripSuffix(..) => (pool.strip_suffix(x, &n).unwrap(), xs[..m - k].to_vec()),
                    Op::Prefix(..) => (pool.prefix(x, &n).unwrap(), xs[..k].to_vec()),
                    _ => (pool.suffix(x, &n).unwrap(), xs[m - k..].to_vec()),
                }
            }
            Op::Rotate(a, k) => {
                let (x, mut xs) = pick(*a);
                if !xs.is_empty() {
                    let r = k % xs.len();
                    xs.rotate_left(r);
                }
                (pool.rotate_left(x, &Length::from(*k)), xs)
            }
            Op::Reverse(a) => {
                let (x, mut xs) = pick(*a);
                xs.reverse();
                (pool.reverse(x), xs)
            }
            Op::Power(a, k) => {
                let (x, xs) = pick(*a);
                (pool.power(x, &Length::from(*k)), xs.repeat(*k))
            }
            Op::Root(a) => {
                let (x, xs) = pick(*a);
                (pool.primitive_root(x).unwrap(), model_root(&xs).to_vec())
            }
        };
        words.push(next);
    }
    words
}

fn mode(i: u8) -> EqualityMode {
    match i % 3 {
        0 => EqualityMode::Fingerprint,
        1 => EqualityMode::Exact,
        _ => EqualityMode::Verify,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn compressed_matches_explicit(ops in prop::collection::vec(op(), 1..24), m in 0u8..3, small_cap in any::<bool>(), seed in any::<u64>()) {
        let mut pool = SlpPool::with_seed(seed);
        pool.set_equality_mode(mode(m));
        // a tiny cap sends primitive roots and equality through the compressed paths
        if small_cap {
            pool.set_cap(3);
        }
        let words = run(&ops, &mut pool);
        for (w, s) in &words {
            prop_assert_eq!(pool.len(*w), &Length::from(s.len()));
            prop_assert_eq!(&pool.symbols(*w).collect::<Vec<_>>(), s);
        }
        for (w, s) in &words {
            for (v, t) in &words {
                prop_assert_eq!(pool.equals(*w, *v), s == t);
            }
        }
    }
}

fn big(pool: &mut SlpPool, exp: u32, base: &[u8]) -> WordRef {
    let b = pool.literal(base);
    pool.power(b, &(Length::from(1u8) << exp))
}

proptest! {
    #[test]
    fn rotation_laws(n in 0u64..1 << 50, m in 0u64..1 << 50, exp in 0u32..45, base in prop::collection::vec(prop::sample::select(b"abc".to_vec()), 1..5), tail in prop::collection::vec(prop::sample::select(b"abc".to_vec()), 0..4)) {
        let mut pool = SlpPool::new();
        let head = big(&mut pool, exp, &base);
        let tail = pool.literal(&tail);
        let w = pool.concat(head, tail);
        let (n, m) = (Length::from(n), Length::from(m));
        let once = pool.rotate_left(w, &n);
        let twice = pool.rotate_left(once, &m);
        let sum = pool.rotate_left(w, &(&n + &m));
        prop_assert!(pool.equals(twice, sum));
        prop_assert_eq!(pool.len(once), pool.len(w));
        let len = pool.len(w).clone();
        let full = pool.rotate_left(w, &len);
        prop_assert!(pool.equals(full, w));
        let back = pool.rotate_left(once, &(&len - &n % &len));
        prop_assert!(pool.equals(back, w));
    }

    #[test]
    fn rotation_matches_explicit_on_short_words(s in prop::collection::vec(prop::sample::select(b"ab".to_vec()), 0..30), n in 0usize..100, m in 0usize..100) {
        let mut pool = SlpPool::new();
        let w = pool.literal(&s);
        let r = pool.rotate_left(w, &Length::from(n));
        let r = pool.rotate_left(r, &Length::from(m));
        let mut t = s.clone();
        if !t.is_empty() {
            let k = (n + m) % t.len();
            t.rotate_left(k);
        }
        prop_assert_eq!(pool.expand(r, 100).unwrap(), t);
    }

    #[test]
    fn compressed_primitive_root(exp in 1u32..50, base in prop::collection::vec(prop::sample::select(b"ab".to_vec()), 1..6)) {
        let mut pool = SlpPool::new();
        let w = big(&mut pool, exp, &base);
        let root = pool.primitive_root(w).unwrap();
        let expected = pool.literal(model_root(&base));
        prop_assert!(pool.equals(root, expected));
    }
}

#[test]
fn doubling_chain() {
    let mut pool = SlpPool::new();
    let mut w = pool.literal(b"a");
    for _ in 0..60 {
        w = pool.concat(w, w);
    }
    assert_eq!(pool.len(w), &(Length::from(1u8) << 60usize));
    assert!(pool.node_count() < 70);
    let root = pool.primitive_root(w).unwrap();
    assert_eq!(pool.expand(root, 10).unwrap(), b"a");
    let r = pool.reverse(w);
    assert!(pool.equals(r, w));
}
