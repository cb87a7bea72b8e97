//! Line-oriented text formats for graphs, orders, decompositions,
//! transductions and expansion choices.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use lacon_core::graph::LinearOrder;
use lacon_core::lacon::{Arcs, Lacon};
use lacon_core::logic::parse_formula;
use lacon_core::parity::Parity;
use lacon_core::pipeline::{ExpansionChoice, Transduction};
use lacon_core::shrub::Shrub;
use lacon_core::LabeledGraph;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Whole(String),
}

fn at(line: usize) -> impl Fn(String) -> FormatError {
    move |message| FormatError::Line { line, message }
}

/// Non-empty, comment-stripped lines with their 1-based numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn arity(tokens: &[&str], n: usize, line: usize) -> Result<(), FormatError> {
    if tokens.len() != n {
        return Err(at(line)(format!("`{}` expects {} arguments, found {}", tokens[0], n - 1, tokens.len() - 1)));
    }
    Ok(())
}

fn number<T: std::str::FromStr>(token: &str, line: usize) -> Result<T, FormatError> {
    token.parse().map_err(|_| at(line)(format!("`{token}` is not a valid number")))
}

fn header<'a>(text: &'a str, keyword: &str) -> Result<(usize, Vec<&'a str>, Vec<(usize, Vec<&'a str>)>), FormatError> {
    let mut it = lines(text);
    match it.next() {
        Some((line, tokens)) if tokens[0] == keyword => Ok((line, tokens, it.collect())),
        Some((line, tokens)) => Err(at(line)(format!("expected `{keyword}` header, found `{}`", tokens[0]))),
        None => Err(FormatError::Whole(format!("empty input, expected `{keyword}` header"))),
    }
}

pub fn parse_graph(text: &str) -> Result<LabeledGraph, FormatError> {
    let mut g = LabeledGraph::new();
    for (line, tokens) in lines(text) {
        let err = at(line);
        match tokens[0] {
            "node" => {
                if tokens.len() < 2 {
                    return Err(err("`node` expects a name".into()));
                }
                let v = g.add_vertex(tokens[1]).map_err(|e| err(e.to_string()))?;
                for label in &tokens[2..] {
                    g.add_label(label, v);
                }
            }
            "edge" => {
                arity(&tokens, 3, line)?;
                g.add_edge_by_name(tokens[1], tokens[2]).map_err(|e| err(e.to_string()))?;
            }
            "sim" => {
                arity(&tokens, 3, line)?;
                g.add_sim_by_name(tokens[1], tokens[2]).map_err(|e| err(e.to_string()))?;
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }
    Ok(g)
}

pub fn write_graph(g: &LabeledGraph) -> String {
    let mut out = String::new();
    for v in 0..g.vertex_count() {
        let labels = g.labels_of(v);
        if labels.is_empty() {
            writeln!(out, "node {}", g.name(v)).unwrap();
        } else {
            writeln!(out, "node {} {}", g.name(v), labels.join(" ")).unwrap();
        }
    }
    for (a, b) in g.edges() {
        writeln!(out, "edge {} {}", g.name(a), g.name(b)).unwrap();
    }
    for (a, b) in g.sim_pairs() {
        writeln!(out, "sim {} {}", g.name(a), g.name(b)).unwrap();
    }
    out
}

/// Order file: one or more `order` lines, concatenated in ascending rank.
pub fn parse_order(text: &str) -> Result<LinearOrder, FormatError> {
    let mut seq = Vec::new();
    let mut last = 0;
    for (line, tokens) in lines(text) {
        if tokens[0] != "order" {
            return Err(at(line)(format!("unknown directive `{}`", tokens[0])));
        }
        seq.extend(tokens[1..].iter().map(|s| s.to_string()));
        last = line;
    }
    LinearOrder::from_sequence(&seq).map_err(|e| at(last)(e.to_string()))
}

pub fn write_order(order: &LinearOrder) -> String {
    format!("order {}\n", order.sequence().join(" "))
}

pub fn parse_lacon(text: &str) -> Result<Lacon, FormatError> {
    let (line, head, rest) = header(text, "lacon")?;
    let mut l = match head[1..] {
        [] => Lacon::undirected(),
        ["directed"] => Lacon::directed(),
        _ => return Err(at(line)("expected `lacon` or `lacon directed`".into())),
    };
    let mut order: Option<(usize, Vec<String>)> = None;
    for (line, tokens) in rest {
        let err = at(line);
        match tokens[0] {
            "target" => {
                arity(&tokens, 2, line)?;
                l.add_target(tokens[1]).map_err(|e| err(e.to_string()))?;
            }
            "hidden" => {
                arity(&tokens, 3, line)?;
                let label = match tokens[2] {
                    "0" => false,
                    "1" => true,
                    other => return Err(err(format!("label must be 0 or 1, found `{other}`"))),
                };
                l.add_hidden(tokens[1], label).map_err(|e| err(e.to_string()))?;
            }
            "edge" => {
                arity(&tokens, 3, line)?;
                l.connect_by_name(tokens[1], tokens[2]).map_err(|e| err(e.to_string()))?;
            }
            "arc" => {
                arity(&tokens, 3, line)?;
                l.arc_by_name(tokens[1], tokens[2]).map_err(|e| err(e.to_string()))?;
            }
            "order" => {
                let seq = order.get_or_insert((line, Vec::new()));
                seq.0 = line;
                seq.1.extend(tokens[1..].iter().map(|s| s.to_string()));
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }
    if let Some((line, seq)) = order {
        let order = LinearOrder::from_sequence(&seq).map_err(|e| at(line)(e.to_string()))?;
        l.set_order(&order).map_err(|e| at(line)(e.to_string()))?;
    }
    Ok(l)
}

pub fn write_lacon(l: &Lacon) -> String {
    let mut out = String::from(if l.is_directed() { "lacon directed\n" } else { "lacon\n" });
    for t in l.targets() {
        writeln!(out, "target {t}").unwrap();
    }
    for (h, name) in l.hidden().iter().enumerate() {
        writeln!(out, "hidden {name} {}", u8::from(l.label(h))).unwrap();
    }
    match l.arcs() {
        Arcs::Undirected(n) => {
            for (h, set) in n.iter().enumerate() {
                for t in set.iter() {
                    writeln!(out, "edge {} {}", l.targets()[t], l.hidden()[h]).unwrap();
                }
            }
        }
        Arcs::Directed { inbound, outbound } => {
            for h in 0..l.hidden_count() {
                for t in inbound[h].iter() {
                    writeln!(out, "arc {} {}", l.targets()[t], l.hidden()[h]).unwrap();
                }
                for t in outbound[h].iter() {
                    writeln!(out, "arc {} {}", l.hidden()[h], l.targets()[t]).unwrap();
                }
            }
        }
    }
    out.push_str(&write_order(&l.order()));
    out
}

pub fn parse_shrub(text: &str) -> Result<Shrub, FormatError> {
    let (line, head, rest) = header(text, "shrub")?;
    arity(&head, 1, line)?;
    let mut s = Shrub::default();
    let mut diameter = None;
    for (line, tokens) in rest {
        let err = at(line);
        match tokens[0] {
            "vertex" => {
                arity(&tokens, 2, line)?;
                s.host.add_vertex(tokens[1]).map_err(|e| err(e.to_string()))?;
            }
            "leaf" => {
                arity(&tokens, 3, line)?;
                if s.host.vertex(tokens[1]).is_none() {
                    s.host.add_vertex(tokens[1]).map_err(|e| err(e.to_string()))?;
                }
                s.set_color(tokens[1], number(tokens[2], line)?).map_err(|e| err(e.to_string()))?;
            }
            "edge" => {
                arity(&tokens, 3, line)?;
                s.host.add_edge_by_name(tokens[1], tokens[2]).map_err(|e| err(e.to_string()))?;
            }
            "sig" => {
                arity(&tokens, 4, line)?;
                s.signature.insert((number(tokens[1], line)?, number(tokens[2], line)?, number(tokens[3], line)?));
            }
            "diameter" => {
                arity(&tokens, 2, line)?;
                diameter = Some(number(tokens[1], line)?);
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }
    s.diameter = diameter.ok_or_else(|| FormatError::Whole("missing `diameter` line".into()))?;
    Ok(s)
}

pub fn write_shrub(s: &Shrub) -> String {
    let mut out = String::from("shrub\n");
    for v in s.host.names() {
        match s.colors.get(v) {
            Some(c) => writeln!(out, "leaf {v} {c}").unwrap(),
            None => writeln!(out, "vertex {v}").unwrap(),
        }
    }
    for (a, b) in s.host.edges() {
        writeln!(out, "edge {} {}", s.host.name(a), s.host.name(b)).unwrap();
    }
    for (i, j, d) in &s.signature {
        writeln!(out, "sig {i} {j} {d}").unwrap();
    }
    writeln!(out, "diameter {}", s.diameter).unwrap();
    out
}

pub fn parse_parity(text: &str) -> Result<Parity, FormatError> {
    let (line, head, rest) = header(text, "parity")?;
    arity(&head, 1, line)?;
    let mut p = Parity::new(0);
    let mut bound = None;
    for (line, tokens) in rest {
        let err = at(line);
        match tokens[0] {
            "target" => {
                arity(&tokens, 2, line)?;
                p.add_target(tokens[1]).map_err(|e| err(e.to_string()))?;
            }
            "hidden" => {
                arity(&tokens, 2, line)?;
                p.add_hidden(tokens[1]).map_err(|e| err(e.to_string()))?;
            }
            "edge" => {
                arity(&tokens, 3, line)?;
                p.connect_by_name(tokens[1], tokens[2]).map_err(|e| err(e.to_string()))?;
            }
            "degree-bound" => {
                arity(&tokens, 2, line)?;
                bound = Some(number(tokens[1], line)?);
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }
    p.degree_bound = bound.unwrap_or_else(|| p.max_degree());
    Ok(p)
}

pub fn write_parity(p: &Parity) -> String {
    let mut out = String::from("parity\n");
    for t in p.targets() {
        writeln!(out, "target {t}").unwrap();
    }
    for h in p.hidden() {
        writeln!(out, "hidden {h}").unwrap();
    }
    for (h, name) in p.hidden().iter().enumerate() {
        for t in p.neighbors(h).iter() {
            writeln!(out, "edge {} {name}", p.targets()[t]).unwrap();
        }
    }
    writeln!(out, "degree-bound {}", p.degree_bound).unwrap();
    out
}

/// Transduction file; `copies` defaults to 1, `params` to 0 and the guard
/// and domain formulas to `true`. The edge formula is required.
pub fn parse_transduction(text: &str) -> Result<Transduction, FormatError> {
    let (line, head, _) = header(text, "transduction")?;
    arity(&head, 1, line)?;
    let (mut copies, mut params) = (1usize, 0usize);
    let (mut chi, mut nu, mut phi) = (None, None, None);
    for (i, raw) in text.lines().enumerate().skip(line) {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let value = value.trim();
        let formula = || parse_formula(value).map_err(|e| at(line)(e.to_string()));
        match key {
            "copies" => copies = number(value, line)?,
            "params" => params = number(value, line)?,
            "chi" => chi = Some(formula()?),
            "nu" => nu = Some(formula()?),
            "phi" => phi = Some(formula()?),
            other => return Err(at(line)(format!("unknown directive `{other}`"))),
        }
    }
    let phi = phi.ok_or_else(|| FormatError::Whole("missing `phi` line".into()))?;
    let true_ = lacon_core::logic::Formula::True;
    Transduction::new(params, copies, chi.unwrap_or(true_.clone()), nu.unwrap_or(true_), phi)
        .map_err(|e| FormatError::Whole(e.to_string()))
}

pub fn write_transduction(t: &Transduction) -> String {
    format!(
        "transduction\ncopies {}\nparams {}\nchi {}\nnu {}\nphi {}\n",
        t.copies, t.params, t.basic.chi, t.basic.nu, t.basic.phi
    )
}

/// Choice file of `set Pi <names...>` lines; missing sets are empty.
pub fn parse_choice(text: &str, params: usize) -> Result<ExpansionChoice, FormatError> {
    let mut choice = ExpansionChoice::empty(params);
    for (line, tokens) in lines(text) {
        let err = at(line);
        if tokens[0] != "set" || tokens.len() < 2 {
            return Err(err("expected `set P<i> <names...>`".into()));
        }
        let index: usize = tokens[1]
            .strip_prefix('P')
            .and_then(|i| i.parse().ok())
            .filter(|&i| (1..=params).contains(&i))
            .ok_or_else(|| err(format!("`{}` is not one of P1..P{params}", tokens[1])))?;
        choice.sets[index - 1].extend(tokens[2..].iter().map(|s| s.to_string()));
    }
    Ok(choice)
}

pub fn write_choice(choice: &ExpansionChoice) -> String {
    let mut out = String::new();
    for (i, set) in choice.sets.iter().enumerate() {
        let names: Vec<&str> = set.iter().map(String::as_str).collect();
        writeln!(out, "set P{} {}", i + 1, names.join(" ")).unwrap();
    }
    out
}

/// Names listed in a whitespace- or comma-separated argument.
pub fn name_list(arg: &str) -> Vec<String> {
    arg.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

/// Sorted, duplicate-free name set.
pub fn name_set(arg: &str) -> BTreeSet<String> {
    name_list(arg).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GOLDEN: &str = "# golden graph\nnode a\nnode b\nnode c\nnode d\nnode e\n\nedge a b\nedge a c\nedge b d\nedge c d\nedge c e\nedge d e\n";

    #[test]
    fn graph_examples() {
        let k2 = parse_graph("node a\nnode b\nedge a b").unwrap();
        assert_eq!((k2.vertex_count(), k2.edge_count()), (2, 1));
        let golden = parse_graph(GOLDEN).unwrap();
        assert_eq!((golden.vertex_count(), golden.edge_count()), (5, 6));
        assert!(matches!(parse_graph("node a\nedge a a"), Err(FormatError::Line { line: 2, .. })));
        assert!(matches!(parse_graph("node a\nnode a"), Err(FormatError::Line { line: 2, .. })));
        assert!(matches!(parse_graph("node a\nedge a b"), Err(FormatError::Line { line: 2, .. })));
        assert!(matches!(parse_graph("node a\n\nvertex b"), Err(FormatError::Line { line: 3, .. })));
    }

    #[test]
    fn labels_and_sim_round_trip() {
        let text = "node a L M\nnode b\nnode c L\nedge a b\nsim a c\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(write_graph(&g), text);
    }

    #[test]
    fn order_round_trip() {
        let o = parse_order("order c a\norder b\n").unwrap();
        assert_eq!(o.sequence(), ["c", "a", "b"]);
        assert_eq!(parse_order(&write_order(&o)).unwrap(), o);
        assert!(parse_order("order a a").is_err());
    }

    #[test]
    fn lacon_round_trip_and_errors() {
        let text = "lacon\ntarget a\ntarget b\nhidden h 1\nedge a h\nedge h b\norder h b a\n";
        let l = parse_lacon(text).unwrap();
        assert_eq!(l.decode().unwrap().edge_count(), 1);
        assert_eq!(parse_lacon(&write_lacon(&l)).unwrap(), l);
        let directed = "lacon directed\ntarget a\ntarget b\nhidden h 1\narc a h\narc h b\n";
        let d = parse_lacon(directed).unwrap();
        assert_eq!(parse_lacon(&write_lacon(&d)).unwrap(), d);
        assert!(matches!(parse_lacon("lacon\ntarget a\nhidden h 2"), Err(FormatError::Line { line: 3, .. })));
        assert!(matches!(parse_lacon("lacon\narc a h"), Err(FormatError::Line { line: 2, .. })));
        assert!(matches!(parse_lacon("shrub"), Err(FormatError::Line { line: 1, .. })));
        assert!(matches!(parse_lacon(""), Err(FormatError::Whole(_))));
    }

    #[test]
    fn shrub_and_parity_round_trip() {
        let s = parse_shrub("shrub\nvertex n\nleaf a 1\nleaf b 1\nedge n a\nedge n b\nsig 1 1 2\ndiameter 2\n").unwrap();
        assert_eq!(s.decode().unwrap().edge_count(), 1);
        assert_eq!(parse_shrub(&write_shrub(&s)).unwrap(), s);
        assert!(parse_shrub("shrub\nleaf a 1\n").is_err());
        let p = parse_parity("parity\ntarget a\ntarget b\nhidden h\nedge a h\nedge b h\ndegree-bound 1\n").unwrap();
        assert_eq!(p.decode().unwrap().edge_count(), 1);
        assert_eq!(parse_parity(&write_parity(&p)).unwrap(), p);
    }

    #[test]
    fn transduction_and_choice() {
        let t = parse_transduction("transduction\ncopies 2\nparams 1\nnu (label P1 x)\nphi (or (edge x y) (sim x y))\n").unwrap();
        assert_eq!((t.copies, t.params), (2, 1));
        assert_eq!(parse_transduction(&write_transduction(&t)).unwrap(), t);
        assert!(matches!(parse_transduction("transduction\nphi (edge x"), Err(FormatError::Line { line: 2, .. })));
        assert!(parse_transduction("transduction\n").is_err());
        let c = parse_choice("set P1 a b@2\n", 1).unwrap();
        assert_eq!(c.sets[0].len(), 2);
        assert_eq!(parse_choice(&write_choice(&c), 1).unwrap(), c);
        assert!(matches!(parse_choice("set P2 a", 1), Err(FormatError::Line { line: 1, .. })));
    }

    proptest! {
        #[test]
        fn graph_round_trip(n in 1usize..8, bits in proptest::collection::vec(any::<bool>(), 28), labels in proptest::collection::vec(0u8..4, 8)) {
            let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
            let mut g = LabeledGraph::with_vertices(&names).unwrap();
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if bits[k] {
                        g.add_edge(a, b).unwrap();
                    }
                    k += 1;
                }
                if labels[a] > 0 {
                    g.add_label(&format!("L{}", labels[a]), a);
                }
            }
            let back = parse_graph(&write_graph(&g)).unwrap();
            prop_assert_eq!(write_graph(&back), write_graph(&g));
            prop_assert!(back.same_structure(&g));
        }
    }
}
