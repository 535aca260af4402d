PGM_MAGIC = b"P5"
PGM_MAXVAL = 255
PGM_WHITESPACE = b" \t\r\n"
PGM_COMMENT = b"#"
MIN_WARP_SCALE = 0.1
MAX_WARP_SCALE = 10.0
# Sampling coordinates are snapped to this many decimals so that grid-aligned samples stay in bounds.
COORD_DECIMALS = 9
