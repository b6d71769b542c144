"""Services: sequential offering, greedy voting engine, correctness, oracles, sweeps, verification."""
