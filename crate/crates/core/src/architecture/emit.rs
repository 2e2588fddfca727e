use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ArchitectureNetlist, ControlSchedule, OpCode};
use crate::binder::StorageKind;

/// Netlist and control in one document.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Design {
    pub netlist: ArchitectureNetlist,
    pub control: ControlSchedule,
}

pub fn emit_json(n: &ArchitectureNetlist, c: &ControlSchedule) -> String {
    let design = Design {
        netlist: n.clone(),
        control: c.clone(),
    };
    let mut out = serde_json::to_string_pretty(&design).expect("design serializes");
    out.push('\n');
    out
}

pub fn parse_design(text: &str) -> Result<Design, serde_json::Error> {
    serde_json::from_str(text)
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Port → element → port topology, one edge per distinct connection,
/// labelled with the number of accesses it carries.
pub fn emit_dot(n: &ArchitectureNetlist) -> String {
    let mut out = String::from("digraph star {\n  rankdir=LR;\n");
    let mut inputs: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    let mut outputs: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for r in &n.input_routing {
        *inputs
            .entry((r.port.as_str(), r.element.as_str()))
            .or_default() += 1;
    }
    for r in &n.output_routing {
        *outputs
            .entry((r.element.as_str(), r.port.as_str()))
            .or_default() += 1;
    }
    let mut in_ports: Vec<&str> = inputs.keys().map(|(p, _)| *p).collect();
    in_ports.dedup();
    let mut out_ports: Vec<&str> = outputs.keys().map(|(_, p)| *p).collect();
    out_ports.sort_unstable();
    out_ports.dedup();
    for p in &in_ports {
        let _ = writeln!(out, "  {} [shape=invhouse];", quoted(&format!("in:{p}")));
    }
    for e in &n.elements {
        let _ = writeln!(
            out,
            "  {} [shape=box, label=\"{} {} x{}\"];",
            quoted(&e.id),
            e.id,
            e.kind.name(),
            e.depth
        );
    }
    for p in &out_ports {
        let _ = writeln!(out, "  {} [shape=house];", quoted(&format!("out:{p}")));
    }
    for ((p, e), count) in &inputs {
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{count}\"];",
            quoted(&format!("in:{p}")),
            quoted(e)
        );
    }
    for ((e, p), count) in &outputs {
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{count}\"];",
            quoted(e),
            quoted(&format!("out:{p}"))
        );
    }
    out.push_str("}\n");
    out
}

fn vhdl_name(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Structural listing in a VHDL-like notation: one instance per element and
/// the control FSM as a cycle-indexed case table. Informative only.
pub fn emit_rtl_text(n: &ArchitectureNetlist, c: &ControlSchedule) -> String {
    let mut widths: BTreeMap<&str, u32> = BTreeMap::new();
    let mut in_ports: Vec<&str> = Vec::new();
    let mut out_ports: Vec<&str> = Vec::new();
    for e in &n.elements {
        for p in &e.input_ports {
            let w = widths.entry(p.as_str()).or_default();
            *w = (*w).max(e.width_bits);
            if !in_ports.contains(&p.as_str()) {
                in_ports.push(p);
            }
        }
        for p in &e.output_ports {
            let w = widths.entry(p.as_str()).or_default();
            *w = (*w).max(e.width_bits);
            if !out_ports.contains(&p.as_str()) {
                out_ports.push(p);
            }
        }
    }
    in_ports.sort_unstable();
    out_ports.sort_unstable();

    let mut out = String::new();
    out.push_str("-- generated by star-forge\n");
    out.push_str(
        "entity star_adapter is\n  port (\n    clk : in  std_logic;\n    rst : in  std_logic",
    );
    for p in &in_ports {
        let _ = write!(
            out,
            ";\n    {}_d : in  std_logic_vector({} downto 0)",
            vhdl_name(p),
            widths[p] - 1
        );
    }
    for p in &out_ports {
        let _ = write!(
            out,
            ";\n    {}_d : out std_logic_vector({} downto 0)",
            vhdl_name(p),
            widths[p] - 1
        );
    }
    out.push_str("\n  );\nend entity star_adapter;\n\n");
    out.push_str("architecture structural of star_adapter is\n");
    let last = c.steps.last().map_or(0, |s| s.cycle);
    let _ = writeln!(out, "  signal cycle : natural range 0 to {last};");
    out.push_str("begin\n");
    for e in &n.elements {
        let unit = match e.kind {
            StorageKind::Fifo => "fifo",
            StorageKind::Lifo => "lifo",
            StorageKind::Reg => "reg_bank",
        };
        let _ = writeln!(
            out,
            "  {} : entity work.{unit} generic map (DEPTH => {}, WIDTH => {}) port map (clk => clk, rst => rst);",
            vhdl_name(&e.id),
            e.depth,
            e.width_bits
        );
    }
    out.push_str(
        "\n  fsm : process (clk)\n  begin\n    if rising_edge(clk) then\n      case cycle is\n",
    );
    for step in c.steps.iter().filter(|s| !s.ops.is_empty()) {
        let _ = writeln!(out, "        when {} =>", step.cycle);
        for op in &step.ops {
            let (el, port) = (vhdl_name(&op.element), vhdl_name(&op.port));
            let line = match op.op {
                OpCode::Push => format!("{el}.push({port}_d);"),
                OpCode::RegWrite => format!("{el}.write({port}_d);"),
                OpCode::Pop => format!("{port}_d <= {el}.pop;"),
                OpCode::Peek => format!("{port}_d <= {el}.peek;"),
                OpCode::RegRead => format!("{port}_d <= {el}.read;"),
            };
            let _ = writeln!(out, "          {line:<40} -- {}", op.token);
        }
    }
    out.push_str(
        "        when others => null;\n      end case;\n    end if;\n  end process fsm;\n",
    );
    out.push_str("end architecture structural;\n");
    out
}
