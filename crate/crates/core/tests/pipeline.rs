use readk_core::composite::build_read_k_generator;
use readk_core::harness::{exact_fooling_error, Caps};
use readk_core::program::parity;
use readk_core::sequence::{format_sequence_file, parse_sequence_file, partition_variables};
use readk_core::{CompositeDescriptor, Generator, InwMode, ObliviousBranchingProgram};

#[test]
fn file_to_fooling_report() {
    let s = parse_sequence_file("# reversal\n6 2\n1 2 3 4 5 6\n6 5 4 3 2 1\n").unwrap();
    assert_eq!(parse_sequence_file(&format_sequence_file(&s)).unwrap(), s);
    let p = partition_variables(&s);
    assert_eq!(p.t(), 1);

    let g = build_read_k_generator(&s, 4, 0.1, InwMode::toy()).unwrap();
    let back = CompositeDescriptor::from_json(&g.to_json()).unwrap();
    assert_eq!(back, g);
    assert_eq!(g.seed_report().total, g.seed_len());

    // Parity read twice cancels to the constant 0, which every generator fools.
    let b = parity(s.elems(), 6);
    let b = ObliviousBranchingProgram::from_json(&b.to_json()).unwrap();
    let r = exact_fooling_error(&b, &back, Caps::default()).unwrap();
    assert_eq!(r.error_exact.as_deref(), Some("0/1"));
    assert_eq!(r.seed_len, g.seed_len());
}

#[test]
fn expansion_is_a_pure_function_of_the_seed() {
    let s = parse_sequence_file("4 2\n1 2 3 4 2 1 4 3\n").unwrap();
    let g = build_read_k_generator(&s, 2, 0.2, InwMode::Hash).unwrap();
    let seed = readk_core::BitString::zeros(g.seed_len());
    assert_eq!(g.expand(&seed).unwrap(), g.expand(&seed).unwrap());
    assert!(g
        .expand(&readk_core::BitString::zeros(g.seed_len() + 1))
        .is_err());
}
