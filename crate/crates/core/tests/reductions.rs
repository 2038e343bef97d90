use cgr_core::oracles::{rewrites_to, Reachability};
use cgr_core::reasoner::sr_deduce;
use cgr_core::reductions::{gen_word_problem_sr, SemiThueSystem};
use cgr_core::{Budget, Outcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn one_step_rewrite_is_deduced() {
    let s = SemiThueSystem::from_strs(&[("ab", "c")], "aab", "ac");
    let (kb, goal) = gen_word_problem_sr(&s).unwrap();
    let v = sr_deduce(&goal, &kb, Budget::uniform(50)).unwrap();
    assert_eq!(v.outcome, Outcome::Proved);
}

#[test]
fn reserved_letters_are_rejected() {
    let s = SemiThueSystem::from_strs(&[("T", "a")], "T", "a");
    assert!(gen_word_problem_sr(&s).is_err());
}

#[test]
fn word_problem_agrees_with_rewriting() {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let mut proved = 0;
    for i in 0..60 {
        let s = SemiThueSystem::random(&mut r, 2, 2, 2);
        let (kb, goal) = gen_word_problem_sr(&s).unwrap();
        let oracle = rewrites_to(&s, 3, 200);
        let v = sr_deduce(&goal, &kb, Budget::uniform(60)).unwrap();
        match oracle {
            Reachability::Reachable(d) if d <= 2 => {
                assert_eq!(v.outcome, Outcome::Proved, "system {i}: {s:?}")
            }
            Reachability::Unreachable => {
                assert_ne!(v.outcome, Outcome::Proved, "system {i}: {s:?}")
            }
            _ => {}
        }
        proved += (v.outcome == Outcome::Proved) as usize;
    }
    assert!(proved > 0);
}
