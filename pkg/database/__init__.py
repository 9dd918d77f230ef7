# Run ledger: runs, reports and outcome cache
