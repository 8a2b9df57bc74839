use patchscale::csvio::{parse_trades, write_trades};
use patchscale_core::market::{FirmId, Side, StockId, Trade};
use patchscale_core::synth::{generate, SynthConfig};
use proptest::prelude::*;

fn round_trip(trades: &[Trade]) -> Vec<Trade> {
    let mut buf = Vec::new();
    write_trades(&mut buf, trades).unwrap();
    assert!(!buf.contains(&b'\r'));
    parse_trades(buf.as_slice()).unwrap()
}

fn trade() -> impl Strategy<Value = Trade> {
    (
        0u64..4_000_000_000,
        "[A-Za-z0-9_]{1,8}",
        "[A-Z]{1,5}",
        any::<bool>(),
        1e-6f64..1e12,
    )
        .prop_map(|(t, f, s, buy, v)| Trade {
            timestamp: t,
            firm: FirmId(f),
            stock: StockId(s),
            side: if buy { Side::Buy } else { Side::Sell },
            value: v,
        })
}

proptest! {
    #[test]
    fn trades_survive_a_round_trip(trades in prop::collection::vec(trade(), 0..200)) {
        prop_assert_eq!(round_trip(&trades), trades);
    }
}

#[test]
fn synthetic_tape_round_trips() {
    let cfg = SynthConfig {
        n_firms: 8,
        noise_fraction: 0.1,
        ..SynthConfig::default()
    };
    let market = generate(&cfg).unwrap();
    assert_eq!(round_trip(&market.trades), market.trades);
}

#[test]
fn quoted_ids_and_plain_decimals() {
    let src = "timestamp,firm_id,stock_id,side,value\n5,\"F,1\",TEF,S,0.5\n7,F2,TEF,B,12\n";
    let t = parse_trades(src.as_bytes()).unwrap();
    assert_eq!(t[0].firm.0, "F,1");
    assert_eq!((t[0].side, t[0].value), (Side::Sell, 0.5));
    assert_eq!(t[1].value, 12.0);
    assert_eq!(round_trip(&t), t);
}

#[test]
fn short_rows_are_rejected_with_line_numbers() {
    let src = "timestamp,firm_id,stock_id,side,value\n5,F,TEF,S,0.5\n6,F,TEF,S\n";
    let e = parse_trades(src.as_bytes()).unwrap_err();
    assert!(e.to_string().contains("line 3"), "{e}");
}
