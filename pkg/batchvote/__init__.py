# Incentive-compatible batch voting
