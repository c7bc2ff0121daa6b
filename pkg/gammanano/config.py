#!/usr/bin/env python3
"""
Configuration defaults for gammanano
"""

# =============================================================================
# SOURCE AND ABSORBER
# =============================================================================

DEFAULT_T1_NS = 141.0               # lifetime of the 14.4 keV level
DEFAULT_OPTICAL_THICKNESS = 5.0
DEFAULT_COHERENCE_RATE_RATIO = 1.0
DEFAULT_DETUNING = 0.0
DEFAULT_NONRESONANT_DEPTH = 0.3
DEFAULT_RECOILLESS_FRACTION = 0.8

# =============================================================================
# QUADRATURE
# =============================================================================

DEFAULT_HORIZON = 20.0              # in units of T1
MIN_HORIZON = 20.0
DEFAULT_REL_TOL = 1e-6
DEFAULT_GRID_STEP = 0.01            # in units of T1
DEFAULT_GL_ORDER = 12
DEFAULT_QUAD_LIMIT = 200
DEFAULT_QAWF_LIMLST = 100

# =============================================================================
# MESSAGE TIMING
# =============================================================================

DEFAULT_MESSAGE = "Nature"
DEFAULT_BIN_WIDTH_NS = 347.0
DEFAULT_PERIOD_NS = 20000.0         # 50 kHz repetition rate
DEFAULT_FRAMING = "none"
DEFAULT_CODE_SIGNAL_FRACTION = 0.5
STX = 0x02
ETX = 0x03

# =============================================================================
# PHASE PROFILE
# =============================================================================

DEFAULT_PHASE_MODE = "ideal"
DEFAULT_RISE_TIME_NS = 28.2         # 0.2 T1
DEFAULT_CONVENTION = "half-wave"

# =============================================================================
# MONTE CARLO
# =============================================================================

DEFAULT_MEAN_RATE_HZ = 5e4
DEFAULT_DURATION_S = 20.0
DEFAULT_SEED = 20240521
DEFAULT_MC_MODE = "macro"
DEFAULT_DETECTOR_EFFICIENCY = 1.0
DEFAULT_CHUNK_S = 1.0
DEFAULT_PHASE_ROWS = 4096           # micro table rows per period
PILE_UP_WARNING = 0.05              # mean photons per lifetime
DEFAULT_THREADS = 4

# =============================================================================
# TAC / HISTOGRAM
# =============================================================================

DEFAULT_CHANNEL_COUNT = 1024
DEFAULT_FREQUENCY_OFFSET_HZ = 0.0
DEFAULT_START_PHASE_NS = 0.0
MISMATCH_OFFSET_HZ = 0.01

DEFAULT_PEAK_K_SIGMA = 6.0
DEFAULT_MIN_TOTAL_COUNTS = 1000
DEFAULT_MIN_PEAK_CHANNELS = 1

# =============================================================================
# CURVES
# =============================================================================

DEFAULT_CURVE_T1 = 1.0              # in units of T1
DEFAULT_CURVE_T2 = 3.0
DEFAULT_CURVE_RISE_TIME = 0.2
DEFAULT_CURVE_T_MAX = 10.0
DEFAULT_CURVE_STEP = 0.05

# =============================================================================
# MEASURED REFERENCE (bleaching counts with and without message)
# =============================================================================

REFERENCE_COUNTS_WITH = 391
REFERENCE_COUNTS_WITHOUT = 358
REFERENCE_RELATIVE_INCREASE = 0.092
REFERENCE_PER_PULSE = 0.0066

# =============================================================================
# OUTPUT
# =============================================================================

DEFAULT_OUTPUT_DIR = "gammanano_output"
RECORDS_FILE = "records.csv"
HISTOGRAM_FILE = "histogram.csv"
SUMMARY_FILE = "summary.json"
PULSE_TRAIN_FILE = "pulse_train.csv"
CURVES_FILE = "curves.csv"
REPORT_FILE = "stealth_report.json"
SELFTEST_FILE = "selftest.json"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_DECODE = 3
EXIT_SELFTEST = 4
