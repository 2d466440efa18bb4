use super::Formula;

const IFF: u8 = 1;
const IMPLIES: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const UNARY: u8 = 5;

pub(super) fn render(f: &Formula) -> String {
    go(f).0
}

fn go(f: &Formula) -> (String, u8) {
    match f {
        Formula::True => ("true".into(), UNARY),
        Formula::False => ("false".into(), UNARY),
        Formula::Atom(fact) => (format!("theta({}, {})", fact.agent, fact.action), UNARY),
        Formula::Not(g) => (format!("!{}", operand(g)), UNARY),
        Formula::Knows(j, g) => (format!("K[{j}] {}", operand(g)), UNARY),
        Formula::Poss(j, g) => (format!("P[{j}] {}", operand(g)), UNARY),
        Formula::And(a, b) => binary(a, b, "&", AND, false),
        Formula::Or(a, b) => binary(a, b, "|", OR, false),
        Formula::Implies(a, b) => binary(a, b, "->", IMPLIES, true),
        Formula::Iff(a, b) => binary(a, b, "<->", IFF, false),
    }
}

fn operand(g: &Formula) -> String {
    let (s, p) = go(g);
    if p < UNARY {
        format!("({s})")
    } else {
        s
    }
}

fn binary(a: &Formula, b: &Formula, op: &str, prec: u8, right_assoc: bool) -> (String, u8) {
    let (ls, lp) = go(a);
    let (rs, rp) = go(b);
    let left = if lp < prec || (lp == prec && right_assoc) {
        format!("({ls})")
    } else {
        ls
    };
    let right = if rp < prec || (rp == prec && !right_assoc) {
        format!("({rs})")
    } else {
        rs
    };
    (format!("{left} {op} {right}"), prec)
}
