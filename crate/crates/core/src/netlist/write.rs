//! Deterministic netlist serialization; `parse(write(nl))` is structurally
//! identical to `nl`.

use std::fmt::Write as _;

use super::types::*;

fn range_str(range: Option<(u32, u32)>) -> String {
    match range {
        Some((msb, lsb)) => format!("[{msb}:{lsb}] "),
        None => String::new(),
    }
}

pub fn write_netlist(nl: &Netlist) -> String {
    let mut out = String::new();
    for m in &nl.modules {
        let header = m.header.join(", ");
        writeln!(out, "module {} ({header});", m.name).unwrap();
        for p in &m.ports {
            let dir = match p.dir {
                PortDir::Input => "input",
                PortDir::Output => "output",
            };
            writeln!(out, "  {dir} {}{};", range_str(p.range), p.name).unwrap();
        }
        for w in &m.wires {
            writeln!(out, "  wire {}{};", range_str(w.range), w.name).unwrap();
        }
        for inst in &m.instances {
            match &inst.conns {
                Connections::Ordered(nets) => {
                    writeln!(
                        out,
                        "  {} {} ({});",
                        inst.target,
                        inst.name,
                        nets.join(", ")
                    )
                    .unwrap();
                }
                Connections::Named(pairs) => {
                    let conns: Vec<String> = pairs
                        .iter()
                        .map(|(formal, actual)| {
                            let net = match actual {
                                NetExpr::Scalar(n) | NetExpr::Bus(n) => n,
                            };
                            format!(".{formal}({net})")
                        })
                        .collect();
                    writeln!(
                        out,
                        "  {} {} ({});",
                        inst.target,
                        inst.name,
                        conns.join(", ")
                    )
                    .unwrap();
                }
            }
        }
        writeln!(out, "endmodule").unwrap();
        writeln!(out).unwrap();
    }
    out
}
