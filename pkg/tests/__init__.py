# Tests package for Persym Ranks
