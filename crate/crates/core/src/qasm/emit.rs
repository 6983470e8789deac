use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use super::Circuit;

/// Canonical OpenQASM 3.0 text for `circuit`.
///
/// Registers are always named `q` and `c`; gates come first, then
/// measurements. Angles use the shortest decimal form that reads back to the
/// same `f64`, so `parse(emit(c)) == c` and emitting is a fixpoint.
pub fn emit(circuit: &Circuit) -> String {
    let mut out = String::from("OPENQASM 3.0;\ninclude \"stdgates.inc\";\n");
    let _ = writeln!(out, "qubit[{}] q;", circuit.n_qubits);
    if circuit.n_clbits > 0 {
        let _ = writeln!(out, "bit[{}] c;", circuit.n_clbits);
    }
    for op in &circuit.ops {
        out.push_str(op.gate.name());
        if !op.params.is_empty() {
            out.push('(');
            for (i, p) in op.params.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&format_angle(*p));
            }
            out.push(')');
        }
        for (i, q) in op.qubits.iter().enumerate() {
            out.push_str(if i == 0 { " " } else { ", " });
            let _ = write!(out, "q[{q}]");
        }
        out.push_str(";\n");
    }
    for (q, c) in &circuit.measures {
        let _ = writeln!(out, "c[{c}] = measure q[{q}];");
    }
    out
}

fn format_angle(v: f64) -> String {
    // `{:?}` always yields a literal the lexer reads back exactly: "1.0", "-0.5", "1e-20".
    format!("{v:?}")
}
