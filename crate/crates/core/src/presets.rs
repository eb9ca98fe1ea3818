//! Built-in example presentations, usable by name from the CLI and tests.

/// The pro-2 integers: one generator, no relators.
pub const ZP2: &str = "p = 2\ngens = g\n";

/// The pro-3 integers.
pub const ZP3: &str = "p = 3\ngens = g\n";

/// Free pro-2 group of rank 2.
pub const FREE2: &str = "p = 2\ngens = x, y\n";

/// Free pro-2 group of rank 3.
pub const FREE3: &str = "p = 2\ngens = x, y, z\n";

/// Smallest interesting mild presentation: one relator of commutator depth 1.
pub const MILD1: &str = "p = 2\ngens = x, g\nrels = [x, g] = x^2\n";

/// Mild presentation with two kernel generators.
pub const MILD2: &str = "p = 2\ngens = x, y, g\nrels = [x, g] = [y, x]\n";

/// Flag but not mild: the relator iterates the distinguished commutator twice.
pub const FLAG_DEEP: &str = "p = 3\ngens = x, g\nrels = [x, g, g] = x^3\n";

pub const NAMES: &[&str] = &["zp2", "zp3", "free2", "free3", "mild1", "mild2", "flag-deep"];

/// Looks up a preset presentation by name.
pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "zp2" => Some(ZP2),
        "zp3" => Some(ZP3),
        "free2" => Some(FREE2),
        "free3" => Some(FREE3),
        "mild1" => Some(MILD1),
        "mild2" => Some(MILD2),
        "flag-deep" => Some(FLAG_DEEP),
        _ => None,
    }
}
