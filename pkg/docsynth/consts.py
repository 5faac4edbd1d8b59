# record categories
CATEGORY_DOC = "doc"
CATEGORY_CHART = "chart"
CATEGORY_TABLE = "table"
CATEGORIES = (CATEGORY_DOC, CATEGORY_CHART, CATEGORY_TABLE)

LANGUAGES = ("zh", "en")

ROLE_HUMAN = "human"
ROLE_GPT = "gpt"

# layout region kinds, in the order the doc prompt lists them
REGION_KINDS = ("printed_text", "table", "chart", "printed_formula", "seal")
LAYOUT_SCHEMA_VERSION = 1
# line boxes may stick out of their region by this many pixels
LINE_BBOX_TOLERANCE_PX = 2.0

# gateway
GATEWAY_MODES = ("live", "record", "replay")
DEFAULT_TEMPERATURE = 0.7
DEFAULT_MAX_OUTPUT_TOKENS = 2048
DEFAULT_MAX_RETRIES = 3
DEFAULT_MAX_INFLIGHT = 4
DEFAULT_TIMEOUT_S = 60.0
DEFAULT_BACKOFF_S = 1.0
DEFAULT_API_KEY_ENV = "LLM_API_KEY"

# docqa
DEFAULT_MIN_PAIRS = 5
DEFAULT_DOC_GENRE = "research report"
DEFAULT_BANNED_PREFIXES = (
    "请问",
    "请回答",
    "在文档中",
    "Please ask",
    "Please answer",
    "In the document",
)
DEFAULT_BANNED_LAYOUT_WORDS = (
    "表格",
    "布局",
    "版面",
    "区域",
    "左上角",
    "右上角",
    "左下角",
    "右下角",
    "第一列",
    "第二列",
    "第三列",
    "第一行",
    "第二行",
    "layout",
    "bounding box",
    "top left",
    "top right",
    "bottom left",
    "bottom right",
)
DEFAULT_STRIP_PUNCTUATION = "。，、；：？！“”‘’「」『』（）《》【】…·;:!?\"'()[]"

# charts
CHART_TYPES = (
    "bar",
    "line",
    "pie",
    "area",
    "scatter",
    "stacked_bar",
    "histogram",
    "box",
    "heatmap",
)
LEGEND_POSITIONS = ("right", "bottom", "top")
DEFAULT_TOPICS = ("Art & Design", "Science & Nature")
DEFAULT_CHART_LOCALE = "zh"
DEFAULT_VALUE_SCALE = 0.2
CHART_WIDTH_RANGE = (640, 1024)
CHART_HEIGHT_RANGE = (480, 768)
BOX_STATS = ("min", "q1", "median", "q3", "max")

# answers are compared with this relative tolerance
NUMERIC_REL_TOL = 1e-6
NUMERIC_ABS_TOL = 1e-9
# share of parseable cells that makes a table column numeric
NUMERIC_COLUMN_SHARE = 0.8

# table task taxonomy
TABLE_TASK_TYPES = (
    "Factoid",
    "FreeForm",
    "MultipleChoice",
    "List",
    "YesNo",
    "Explanation",
    "Comparison",
    "Causal",
    "Computation",
    "Classification",
    "TimeSeries",
)

# preprocess
PATCH_PX = 28
TRAIN_THRESHOLD_MIN = 512
TRAIN_THRESHOLD_MAX = 768
INFER_UPSCALE_MIN = 1.1
INFER_UPSCALE_MAX = 1.3
LOW_RES_CUTOFF = 448

# mix sampler
DEFAULT_SYNTHETIC_FRACTION = 0.12

# ocr augment
OCR_PROMPT_PREFIX = (
    "Use the image and the OCR result as context and answer the following question: "
)
DEFAULT_MAX_OCR_CHARS = 2000
DEFAULT_MIN_MEAN_CONFIDENCE = 0.9

# environment prefix for configuration overrides
ENV_PREFIX = "DOCSYNTH"
