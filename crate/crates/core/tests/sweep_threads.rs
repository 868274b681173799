//! Worker-count independence. Kept in its own test binary because it sets the
//! process-wide thread-cap variable.

use qmb::sweeps::{scan_gamma_chi, sweep_chi, worker_count, SweepOptions, THREADS_ENV};
use qmb::SystemParams;

#[test]
fn rows_do_not_depend_on_worker_count() {
    let grid = [0.5, 3.0, 40.0, 400.0];
    let template = SystemParams::fig2(1.0);
    let opts = SweepOptions::default();

    std::env::set_var(THREADS_ENV, "1");
    assert_eq!(worker_count(), 1);
    let serial = sweep_chi(&template, &grid, &opts).unwrap();
    let serial_scan = scan_gamma_chi(&template, &grid[1..3], 5, &opts).unwrap();

    std::env::set_var(THREADS_ENV, "4");
    assert_eq!(worker_count(), 4);
    let parallel = sweep_chi(&template, &grid, &opts).unwrap();
    let parallel_scan = scan_gamma_chi(&template, &grid[1..3], 5, &opts).unwrap();
    std::env::remove_var(THREADS_ENV);

    assert_eq!(serial, parallel);
    assert_eq!(serial_scan, parallel_scan);
    assert_eq!(serial.iter().map(|r| r.chi).collect::<Vec<_>>(), grid);
}
