# Tests for batchvote
