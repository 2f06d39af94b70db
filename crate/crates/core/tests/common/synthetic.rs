//! Seeded generator of varied synthetic questions.

use mcqlint::corpus::Dataset;
use mcqlint::Mcq;
use rand::rngs::StdRng;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};

const DOMAINS: [&str; 4] = ["biology", "chemistry", "history", "computing"];
const NOUNS: [&str; 16] = [
    "cell", "enzyme", "protein", "gas", "metal", "river", "empire", "treaty", "algorithm", "compiler",
    "molecule", "planet", "virus", "acid", "network", "protocol",
];
const ADJS: [&str; 10] = [
    "largest", "oldest", "lightest", "most stable", "most common", "fastest", "densest", "smallest",
    "most reactive", "least known",
];
const THINGS: [&str; 20] = [
    "argon", "oxygen", "iron", "copper", "Rome", "Carthage", "insulin", "glucagon", "quicksort",
    "mergesort", "mitochondrion", "ribosome", "nitrogen", "helium", "Sparta", "Athens", "TCP", "UDP",
    "pepsin", "amylase",
];
const VERBS: [&str; 6] = ["Identify", "Explain", "Compare", "Describe", "Evaluate", "Design"];

pub fn questions(n: usize, seed: u64) -> Vec<Mcq> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|i| one(&mut rng, i)).collect()
}

pub fn dataset(n: usize, seed: u64) -> Dataset {
    Dataset::new(questions(n, seed))
}

fn one(rng: &mut StdRng, i: usize) -> Mcq {
    let domain = DOMAINS[i % DOMAINS.len()];
    let noun = *NOUNS.choose(rng).unwrap();
    let adj = *ADJS.choose(rng).unwrap();
    let n_opts = rng.random_range(3..=5);
    let mut opts: Vec<String> = THINGS.choose_multiple(rng, n_opts).map(|s| s.to_string()).collect();
    let stem = match rng.random_range(0..8) {
        0 => format!("Which {noun} is the {adj}?"),
        1 => format!("Which of the following is NOT a {noun}?"),
        2 => format!("The ____ is the {adj} {noun} in the sample."),
        3 => {
            let mut v: Vec<u32> = (0..n_opts).map(|_| rng.random_range(1..500)).collect();
            if rng.random_bool(0.5) {
                v.sort_unstable();
            }
            opts = v.iter().map(|x| x.to_string()).collect();
            format!("How many {noun} samples were counted in the {adj} group?")
        }
        4 => {
            opts = vec!["True".into(), "False".into()];
            format!("The {noun} is always the {adj} one.")
        }
        5 => {
            let last = opts.len() - 1;
            opts[last] = if rng.random_bool(0.5) { "None of the above" } else { "All of the above" }.into();
            format!("{} the role of the {adj} {noun}.", VERBS.choose(rng).unwrap())
        }
        6 => {
            opts[0] = format!("{} usually reacts with every {noun}", opts[0]);
            format!("What happens to the {noun} when it is heated?")
        }
        _ => format!(
            "A student studied the {noun} for many weeks. Which {noun} did the student find to be the {adj}?"
        ),
    };
    let key = rng.random_range(0..opts.len());
    Mcq::new(format!("s{i:04}"), domain, stem, opts, key).unwrap()
}

#[allow(dead_code)]
pub fn shuffled(m: &Mcq, rng: &mut StdRng) -> (Mcq, Vec<usize>) {
    let mut order: Vec<usize> = (0..m.options.len()).collect();
    order.shuffle(rng);
    (m.permuted(&order), order)
}
