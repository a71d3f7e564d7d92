// Values frozen from `tests/oracles/pin_values.py` (numpy + mpmath, independent of
// this crate). Re-run the script to regenerate `fixtures/oracle_pins.json`; the
// scalars below are copied from its output.

pub const THETA: f64 = std::f64::consts::FRAC_PI_4;
pub const DEPOLARIZING: f64 = 0.3;

pub const CANONICAL_ENTROPY: f64 = 0.6008760366928562;
pub const CANONICAL_AVG_EIGS: [f64; 2] = [0.8535533905932737, 0.1464466094067262];

/// `(n, rank P, Tr[rho^n P], Tr[rho^n (I - P)])` at delta = 0.25.
pub const CANONICAL_TYPICAL_D025: [(usize, usize, f64, f64); 3] = [
    (4, 0, 0.0, 1.0),
    (8, 8, 0.3867088854806964, 0.6132911145193036),
    (12, 78, 0.598434223264546, 0.401565776735454),
];

pub const DEPOLARIZED_CHI: f64 = 0.20539600417358927;
pub const DEPOLARIZED_N4_D03_WORD: [usize; 4] = [0, 1, 0, 0];
pub const DEPOLARIZED_N4_D03_WORD_RANK: usize = 4;
pub const DEPOLARIZED_N6_D03_COND_ATYPICAL: f64 = 0.60066521875;

/// Canonical, n = 6, delta = 0.2.
pub const CANONICAL_N6_D02_RANK: usize = 6;
pub const CANONICAL_N6_D02_F: [f64; 5] = [
    0.39809253220871643,
    0.026412944033391277,
    0.0017524659622233066,
    0.00011627393541851029,
    7.714630896771252e-06,
];
pub const CANONICAL_N6_D02_N2_A_EXACT: f64 = 0.371679588175325;
pub const CANONICAL_N6_D02_N2_CERTIFIED: f64 = 0.050824483502624154;
pub const CANONICAL_N6_D02_N2_AVG_ERR: f64 = 0.8511069400896912;

/// `f_0` at delta = 0.5 for n = 4, 6, 8. Not monotone in n.
pub const CANONICAL_D05_F0: [(usize, f64); 3] = [
    (4, 0.8950667382415922),
    (6, 0.9555561186097112),
    (8, 0.9006675989586221),
];

/// Canonical, n = 4, delta = 0.3, the two-word code below.
pub const CODE_N4: [[usize; 4]; 2] = [[0, 1, 0, 0], [1, 1, 0, 1]];
/// `Tr[E_u rho_v]`, rows `E_0, E_1, E_2`.
pub const CODE_N4_CONFUSION: [[f64; 2]; 3] = [
    [0.8673024892637612, 0.8673024892637612],
    [0.13269751073623878, 0.0],
    [0.0, 0.13269751073623876],
];
pub const CODE_N4_SEQUENTIAL_ERR: f64 = 0.8673024892637613;
pub const CODE_N4_PGM_ERR: f64 = 0.6357233047033632;
pub const CANONICAL_N4_D03_N2_AVG_ERR: f64 = 0.8780114677666255;

/// `(x, n, log Y)` on the diagonal `y = x`, from 50-digit arithmetic.
pub const LOG_Y_DIAGONAL: [(f64, usize, f64); 3] = [
    (1.5, 10, 0.9742353103342065),
    (1.5, 50, 0.9999999976475071),
    (1.3195079107728942, 20, 0.9941533059926173),
];

/// Canonical, delta = 0.1, 200 random codes per point:
/// `(n, R, N, rank P, mean error, stderr)`.
pub const RATE_SWEEP_D01: [(usize, f64, usize, usize, f64, f64); 6] = [
    (4, 0.2, 2, 0, 1.0, 0.0),
    (4, 0.9, 12, 0, 1.0, 0.0),
    (6, 0.2, 2, 6, 0.8525724298725494, 0.0008914175033572124),
    (6, 0.9, 42, 6, 0.9688703024711729, 6.93752475024397e-05),
    (8, 0.2, 3, 8, 0.8641115901119459, 0.0006339290294375555),
    (8, 0.9, 147, 8, 0.9886918404190574, 2.0733859121241283e-05),
];
