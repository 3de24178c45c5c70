from pathlib import Path


PROJECT_ROOT = Path(__file__).resolve().parent
DATA_DIR = PROJECT_ROOT / "data"
DEFAULT_DATASET_DIR = DATA_DIR / "dataset"
DEFAULT_RUN_DIR = DATA_DIR / "run"

# dataset layout
META_FILE = "meta.json"
MESH_INSP_FILE = "mesh_insp.obj"
MESH_EXP_FILE = "mesh_exp.obj"
FRAMES_DIR = "frames"
DEPTH_DIR = "depth"
MESHES_DIR = "meshes"
FRAME_NAME = "{index:06d}"

# reconstruction layout
PHASES_FILE = "phases.json"
CLOUD_FILE = "cloud.json"
RENDERS_DIR = "renders"
TIMING_FILE = "timing.json"
CONFIG_FILE = "config.json"

# evaluation layout
REPORT_FILE = "report.json"
PER_FRAME_CSV = "per_frame.csv"

# splatting
NEAR_PLANE_MM = 0.1
FRUSTUM_CLAMP = 1.3
MAX_SPLAT_EXTENT = 1.0
COMPOSITE_CHUNK = 32
COV2D_FLOOR = 0.3
MIN_TRANSMITTANCE = 1e-4
MIN_ALPHA = 1.0 / 255.0
SH_C0 = 0.28209479177387814
SH_C1 = 0.4886025119029199

# optimization
PHASE_EPSILON = 0.05
PSNR_CAP_DB = 99.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2
