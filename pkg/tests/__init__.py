# Tests package for oddsym
