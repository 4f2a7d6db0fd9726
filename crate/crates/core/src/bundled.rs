//! Data shipped with the library: the reference expansions of `h1..h7`, their
//! bracket certificates, and the reference expansion of `g`.

use crate::polyring::MultiPoly;

const H_EXPANSIONS: [&str; 7] = [
    include_str!("../data/h/h1.json"),
    include_str!("../data/h/h2.json"),
    include_str!("../data/h/h3.json"),
    include_str!("../data/h/h4.json"),
    include_str!("../data/h/h5.json"),
    include_str!("../data/h/h6.json"),
    include_str!("../data/h/h7.json"),
];

const CERTIFICATES: [&str; 7] = [
    include_str!("../data/certs/h1.json"),
    include_str!("../data/certs/h2.json"),
    include_str!("../data/certs/h3.json"),
    include_str!("../data/certs/h4.json"),
    include_str!("../data/certs/h5.json"),
    include_str!("../data/certs/h6.json"),
    include_str!("../data/certs/h7.json"),
];

const G_EXPANSION: &str = include_str!("../data/g_expansion.json");

/// Raw JSON of the reference `h_{m2}` expansion, `1 <= m2 <= 7`.
pub fn h_expansion_json(m2: u32) -> Option<&'static str> {
    (1..=7).contains(&m2).then(|| H_EXPANSIONS[m2 as usize - 1])
}

/// Raw JSON of the bracket certificate for `h_{m2}`.
pub fn certificate_json(m2: u32) -> Option<&'static str> {
    (1..=7).contains(&m2).then(|| CERTIFICATES[m2 as usize - 1])
}

pub fn g_expansion_json() -> &'static str {
    G_EXPANSION
}

/// Reference `h_{m2}` over `(b, c)`.
pub fn h_expansion(m2: u32) -> Option<MultiPoly> {
    h_expansion_json(m2).map(|s| MultiPoly::from_json_str(s).expect("bundled h expansion parses"))
}

/// Reference expansion of `g` over `(a, b, c)`.
pub fn g_expansion() -> MultiPoly {
    MultiPoly::from_json_str(G_EXPANSION).expect("bundled g expansion parses")
}
