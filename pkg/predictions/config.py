
import os
import logging
from dotenv import load_dotenv, find_dotenv

# Load environment variables from .env file
load_dotenv(find_dotenv())

# Logging Configuration
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

# Benchmark Settings
HAES_JOBS = int(os.getenv("HAES_JOBS", 1))
HAES_SEEDS = int(os.getenv("HAES_SEEDS", 10))  # seeds 0..HAES_SEEDS-1 per fold
HAES_OUTPUT_DIR = os.getenv("HAES_OUTPUT_DIR", "output")

RESULTS_FILENAME = "results.csv"
FRONTS_FILENAME = "fronts.csv"
MANIFEST_FILENAME = "manifest.json"

# Repo Validation
PROBABILITY_TOLERANCE = float(os.getenv("HAES_PROBABILITY_TOLERANCE", 1e-6))

# Greedy Ensemble Selection
GES_ITERATIONS = int(os.getenv("HAES_GES_ITERATIONS", 100))

# Evolutionary Ensemble Selection
EVO_CAPACITY = int(os.getenv("HAES_EVO_CAPACITY", 50))
EVO_BUDGET = int(os.getenv("HAES_EVO_BUDGET", 2000))
EVO_BATCH_SIZE = int(os.getenv("HAES_EVO_BATCH_SIZE", 20))
EVO_MUTATION_PROB = float(os.getenv("HAES_EVO_MUTATION_PROB", 1.0))

# Behavior Archive
ARCHIVE_BINS = int(os.getenv("HAES_ARCHIVE_BINS", 10))
SIZE_DIM_MAX = int(os.getenv("HAES_SIZE_DIM_MAX", 25))

# Significance Testing
NEMENYI_ALPHA = 0.05


def setup_logging():
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S"
    )
