//! Zero-delay functional reference for all eight operations, at 32-bit and
//! 4-bit-block granularity. Every netlist equivalence test checks against
//! this module.
//!
//! The per-bit result formula shared by both granularities is
//! `r = (op_and ∧ AND) ⊕ (op_xor ∧ XOR) ⊕ (op_arith ∧ carry)`, with carries
//! from `c[i+1] = g[i] ∨ (p[i] ∧ c[i])` and generate suppressed whenever
//! `op_arith` is 0. Suppression is what lets a carry-in of 1 ripple through
//! an all-XNOR chain untouched, which is how EQ reads its answer off the
//! final carry-out.

use crate::alu::{control_word, AluOpcode, ResultSelect};

/// Result of a 32-bit operation: sum word plus carry-out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AluResult {
    pub s: u32,
    pub c_out: bool,
}

/// Architectural 32-bit semantics of each operation.
pub fn exec(op: AluOpcode, a: u32, b: u32) -> AluResult {
    let cw = control_word(op);
    match op {
        AluOpcode::Add => {
            let wide = a as u64 + b as u64;
            AluResult {
                s: wide as u32,
                c_out: wide >> 32 != 0,
            }
        }
        AluOpcode::Sub => {
            let wide = a as u64 + (!b) as u64 + 1;
            AluResult {
                s: wide as u32,
                c_out: wide >> 32 != 0,
            }
        }
        AluOpcode::Slt => {
            let wide = a as u64 + (!b) as u64 + 1;
            let s = ((a as i32) < (b as i32)) as u32;
            AluResult {
                s,
                c_out: wide >> 32 != 0,
            }
        }
        AluOpcode::Eq => AluResult {
            s: 0,
            c_out: a == b,
        },
        AluOpcode::And | AluOpcode::Or | AluOpcode::Xor | AluOpcode::Nor => {
            let s = match op {
                AluOpcode::And => a & b,
                AluOpcode::Or => a | b,
                AluOpcode::Xor => a ^ b,
                _ => !(a | b),
            };
            // With generate suppressed the chain degenerates to
            // propagate-AND: carry-out is c_in gated by all-propagate.
            let p = (a ^ if cw.cmpl_a { !0 } else { 0 }) ^ (b ^ if cw.cmpl_b { !0 } else { 0 });
            AluResult {
                s,
                c_out: p == u32::MAX && cw.c_in,
            }
        }
    }
}

/// One 4-bit block with explicit carry-in; returns the raw sum bits and the
/// block carry-out. Operands must be in `[0, 16)`.
pub fn block_exec(op: AluOpcode, a4: u8, b4: u8, c_in: bool) -> (u8, bool) {
    assert!(a4 < 16 && b4 < 16, "block operands must be 4-bit");
    let cw = control_word(op);
    let ap = a4 ^ if cw.cmpl_a { 0xf } else { 0 };
    let bp = b4 ^ if cw.cmpl_b { 0xf } else { 0 };
    let and = ap & bp;
    let p = ap ^ bp;
    let g = if cw.op_arith { and } else { 0 };

    let mut carry = c_in;
    let mut s = 0u8;
    for i in 0..4 {
        let and_i = and >> i & 1 != 0;
        let p_i = p >> i & 1 != 0;
        let g_i = g >> i & 1 != 0;
        let r = (cw.op_and && and_i) ^ (cw.op_xor && p_i) ^ (cw.op_arith && carry);
        s |= (r as u8) << i;
        carry = g_i || (p_i && carry);
    }
    (s & 0xf, carry)
}

/// Chain all eight blocks through the carry, starting from the opcode's
/// encoded carry-in. Returns the raw 32 sum bits and the final carry-out,
/// before any result-select post-processing.
pub fn compose_blocks(op: AluOpcode, a: u32, b: u32) -> (u32, bool) {
    let mut carry = control_word(op).c_in;
    let mut s = 0u32;
    for k in 0..8 {
        let a4 = (a >> (4 * k) & 0xf) as u8;
        let b4 = (b >> (4 * k) & 0xf) as u8;
        let (s4, c_out) = block_exec(op, a4, b4, carry);
        s |= (s4 as u32) << (4 * k);
        carry = c_out;
    }
    (s, carry)
}

/// Turn raw datapath outputs (sum bits + final carry) into the
/// architectural result, applying the opcode's out-of-band result select.
pub fn finalize(op: AluOpcode, a: u32, b: u32, raw_s: u32, c_out: bool) -> AluResult {
    match op.result_select() {
        ResultSelect::SumBits => AluResult { s: raw_s, c_out },
        ResultSelect::CarryBool => AluResult { s: 0, c_out },
        ResultSelect::SignedLessThan => {
            // raw_s is a - b; signed less-than is sign ⊕ overflow.
            let sign = raw_s >> 31 & 1 != 0;
            let ovf = ((a ^ b) & (a ^ raw_s)) >> 31 & 1 != 0;
            AluResult {
                s: (sign ^ ovf) as u32,
                c_out,
            }
        }
    }
}

/// Sklansky prefix evaluation of the 4-bit carry network: two combine
/// levels over (g, p) pairs, then carry-in injected into each span.
/// Returns `[c0, c1, c2, c3, c4]` with `c0 = c_in`.
pub fn prefix_carries(p: [bool; 4], g: [bool; 4], c_in: bool) -> [bool; 5] {
    // Level 1: spans [1:0] and [3:2].
    let g10 = g[1] || (p[1] && g[0]);
    let p10 = p[1] && p[0];
    let g32 = g[3] || (p[3] && g[2]);
    let p32 = p[3] && p[2];
    // Level 2: spans [2:0] and [3:0].
    let g20 = g[2] || (p[2] && g10);
    let p20 = p[2] && p10;
    let g30 = g32 || (p32 && g10);
    let p30 = p32 && p10;
    [
        c_in,
        g[0] || (p[0] && c_in),
        g10 || (p10 && c_in),
        g20 || (p20 && c_in),
        g30 || (p30 && c_in),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exec_examples() {
        assert_eq!(
            exec(AluOpcode::Add, 0xFFFF_FFFF, 1),
            AluResult { s: 0, c_out: true }
        );
        assert_eq!(
            exec(AluOpcode::Nor, 0, 0),
            AluResult {
                s: 0xFFFF_FFFF,
                c_out: false
            }
        );
        // signed -1 < 0
        assert_eq!(exec(AluOpcode::Slt, 0xFFFF_FFFF, 0).s, 1);
    }

    #[test]
    fn block_examples() {
        assert_eq!(
            block_exec(AluOpcode::Add, 0b0111, 0b0001, false),
            (0b1000, false)
        );
        assert_eq!(
            block_exec(AluOpcode::Add, 0b1111, 0b0001, false),
            (0b0000, true)
        );
        assert_eq!(block_exec(AluOpcode::Nor, 0b0000, 0b0000, false).0, 0b1111);
    }

    // Independent integer-arithmetic route for the 4-bit SUB borrow example.
    #[test]
    fn block_sub_matches_integer_arithmetic() {
        for a in 0u16..16 {
            for b in 0u16..16 {
                for cin in [false, true] {
                    let (s, c) = block_exec(AluOpcode::Sub, a as u8, b as u8, cin);
                    let wide = a + (!b & 0xf) + cin as u16;
                    assert_eq!(s as u16, wide & 0xf);
                    assert_eq!(c, wide >> 4 != 0);
                }
            }
        }
        assert_eq!(
            block_exec(AluOpcode::Sub, 0b0000, 0b0001, true),
            (0b1111, false)
        );
    }

    #[test]
    fn block_eq_carry_propagates_when_equal() {
        for x in 0u8..16 {
            let (_, c) = block_exec(AluOpcode::Eq, x, x, true);
            assert!(c, "EQ carry must survive an all-XNOR block for x={x}");
        }
        // And dies as soon as any bit differs.
        let (_, c) = block_exec(AluOpcode::Eq, 0b1010, 0b1000, true);
        assert!(!c);
        // Spec example: equal operands, carry in 1 -> carry out 1.
        let (_, c) = block_exec(AluOpcode::Eq, 0b1010, 0b1010, true);
        assert!(c);
    }

    #[test]
    fn prefix_matches_ripple_exhaustively() {
        // All 2^9 combinations of (p, g, c_in).
        for bits in 0u16..512 {
            let p = [0, 1, 2, 3].map(|i| bits >> i & 1 != 0);
            let g = [4, 5, 6, 7].map(|i| bits >> i & 1 != 0);
            let c_in = bits >> 8 & 1 != 0;
            let sklansky = prefix_carries(p, g, c_in);
            let mut ripple = [false; 5];
            ripple[0] = c_in;
            for i in 0..4 {
                ripple[i + 1] = g[i] || (p[i] && ripple[i]);
            }
            assert_eq!(sklansky, ripple, "p={p:?} g={g:?} c_in={c_in}");
        }
    }

    #[test]
    fn prefix_examples() {
        assert_eq!(
            prefix_carries([true; 4], [false; 4], true),
            [true, true, true, true, true]
        );
        assert_eq!(
            prefix_carries([false; 4], [false; 4], true),
            [true, false, false, false, false]
        );
    }

    #[test]
    fn composition_reproduces_exec_randomized() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xB10C);
        for op in AluOpcode::ALL {
            for i in 0..100_000 {
                let (a, b) = match i {
                    0 => (0, 0),
                    1 => (u32::MAX, u32::MAX),
                    2 => (u32::MAX, 1),
                    3 => (0x8000_0000, 0x7FFF_FFFF),
                    _ => (rng.gen(), rng.gen()),
                };
                let (raw_s, c) = compose_blocks(op, a, b);
                assert_eq!(
                    finalize(op, a, b, raw_s, c),
                    exec(op, a, b),
                    "op={op} a={a:#x} b={b:#x}"
                );
            }
        }
    }

    /// Exhaustive truncated variant: chain two blocks over all 8-bit
    /// operand pairs and compare against independent integer arithmetic.
    #[test]
    fn composition_exhaustive_two_blocks() {
        for op in AluOpcode::ALL {
            let cw = control_word(op);
            for a in 0u32..256 {
                for b in 0u32..256 {
                    let mut carry = cw.c_in;
                    let mut s = 0u32;
                    for k in 0..2 {
                        let (s4, c) = block_exec(
                            op,
                            (a >> (4 * k) & 0xf) as u8,
                            (b >> (4 * k) & 0xf) as u8,
                            carry,
                        );
                        s |= (s4 as u32) << (4 * k);
                        carry = c;
                    }
                    // 8-bit reference built from plain integer arithmetic.
                    let (exp_s, exp_c) = match op {
                        AluOpcode::Add => ((a + b) & 0xff, (a + b) >> 8 != 0),
                        AluOpcode::Sub | AluOpcode::Slt => {
                            let wide = a + (!b & 0xff) + 1;
                            (wide & 0xff, wide >> 8 != 0)
                        }
                        AluOpcode::Eq => (!(a ^ b) & 0xff, a == b),
                        AluOpcode::And => (a & b, false),
                        AluOpcode::Or => (a | b, false),
                        AluOpcode::Xor => (a ^ b, false),
                        AluOpcode::Nor => (!(a | b) & 0xff, false),
                    };
                    assert_eq!((s, carry), (exp_s, exp_c), "op={op} a={a:#x} b={b:#x}");
                }
            }
        }
    }

    #[test]
    fn two_complement_identity() {
        for &(a, b) in &[
            (0u32, 0u32),
            (5, 3),
            (3, 5),
            (u32::MAX, 1),
            (0x8000_0000, 1),
        ] {
            let sub = exec(AluOpcode::Sub, a, b).s;
            let add = exec(AluOpcode::Add, a, (!b).wrapping_add(1)).s;
            assert_eq!(sub, add);
        }
    }

    #[test]
    fn or_equals_and_xor_gating() {
        for &(a, b) in &[(0u32, 0u32), (0xF0F0, 0x0FF0), (u32::MAX, 0x1234_5678)] {
            assert_eq!((a & b) ^ (a ^ b), a | b);
        }
    }
}
