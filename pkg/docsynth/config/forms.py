"""
One form per configuration section.

Sections are plain mappings (TOML tables, possibly patched from the
environment), so the forms are built with keyword data rather than
request data and every field converts its own value.
"""

import typing as t

from wtforms import fields
from wtforms import Form
from wtforms.utils import unset_value
from wtforms.validators import AnyOf
from wtforms.validators import DataRequired
from wtforms.validators import NumberRange

from ..babel import gettext
from ..chart.mutate import LLM
from ..chart.mutate import RULE_BASED
from ..chart.tasks import TaskMatrix
from ..consts import CHART_HEIGHT_RANGE
from ..consts import CHART_WIDTH_RANGE
from ..consts import DEFAULT_API_KEY_ENV
from ..consts import DEFAULT_BACKOFF_S
from ..consts import DEFAULT_BANNED_LAYOUT_WORDS
from ..consts import DEFAULT_BANNED_PREFIXES
from ..consts import DEFAULT_CHART_LOCALE
from ..consts import DEFAULT_DOC_GENRE
from ..consts import DEFAULT_MAX_INFLIGHT
from ..consts import DEFAULT_MAX_OCR_CHARS
from ..consts import DEFAULT_MAX_OUTPUT_TOKENS
from ..consts import DEFAULT_MAX_RETRIES
from ..consts import DEFAULT_MIN_MEAN_CONFIDENCE
from ..consts import DEFAULT_MIN_PAIRS
from ..consts import DEFAULT_STRIP_PUNCTUATION
from ..consts import DEFAULT_SYNTHETIC_FRACTION
from ..consts import DEFAULT_TEMPERATURE
from ..consts import DEFAULT_TIMEOUT_S
from ..consts import DEFAULT_TOPICS
from ..consts import DEFAULT_VALUE_SCALE
from ..consts import GATEWAY_MODES
from ..consts import INFER_UPSCALE_MAX
from ..consts import INFER_UPSCALE_MIN
from ..consts import LANGUAGES
from ..consts import LOW_RES_CUTOFF
from ..consts import PATCH_PX
from ..consts import TRAIN_THRESHOLD_MAX
from ..consts import TRAIN_THRESHOLD_MIN
from ..exceptions import TaskMatrixError
from .validators import Callback
from .validators import ExclusiveWith
from .validators import ListInputRequired
from .validators import NotGreaterThan
from .validators import OpenUnitInterval
from .validators import OptionalValue

__all__ = [
    "SECTION_FORMS",
    "GatewayForm",
    "DocQaForm",
    "ChartForm",
    "TableForm",
    "PreprocessForm",
    "MixForm",
    "AugmentForm",
    "RunForm",
]


class NumberField(fields.FloatField):
    """
    Float field that converts mapping data, not only form data.
    """

    def process_data(self, value: t.Any) -> None:
        if value is None or value is unset_value or value == "":
            self.data = None
            return
        if isinstance(value, bool):
            self.data = None
            raise ValueError(self.gettext("Not a valid float value."))
        try:
            self.data = float(value)
        except (ValueError, TypeError) as err:
            self.data = None
            raise ValueError(self.gettext("Not a valid float value.")) from err


class StringListField(fields.Field):
    """
    A list of strings; the data is a tuple.
    """

    def process_data(self, value: t.Any) -> None:
        if value is None:
            self.data = ()
            return
        if isinstance(value, str) or not isinstance(value, (list, tuple)):
            self.data = ()
            raise ValueError(gettext("Expected a list of strings."))
        if not all(isinstance(item, str) for item in value):
            self.data = ()
            raise ValueError(gettext("Expected a list of strings."))
        self.data = tuple(value)


class MappingField(fields.Field):
    """
    A table of string lists, e.g. ``{bar = ["Sum", "Average"]}``.
    """

    def process_data(self, value: t.Any) -> None:
        if value is None:
            self.data = {}
            return
        if not isinstance(value, dict):
            self.data = {}
            raise ValueError(gettext("Expected a table."))
        data = {}
        for key, items in value.items():
            if not isinstance(items, (list, tuple)) or not all(
                isinstance(item, str) for item in items
            ):
                self.data = {}
                raise ValueError(gettext("Expected a list of strings for %(key)s.", key=key))
            data[str(key)] = tuple(items)
        self.data = data


class GatewayForm(Form):
    endpoint = fields.StringField(default="")
    model = fields.StringField(default="")
    mode = fields.StringField(default="replay", validators=[AnyOf(GATEWAY_MODES)])
    replay_store = fields.StringField(default=None)
    api_key_env = fields.StringField(default=DEFAULT_API_KEY_ENV, validators=[DataRequired()])
    max_retries = fields.IntegerField(
        default=DEFAULT_MAX_RETRIES, validators=[NumberRange(min=0)]
    )
    max_inflight = fields.IntegerField(
        default=DEFAULT_MAX_INFLIGHT, validators=[NumberRange(min=1)]
    )
    timeout = NumberField(default=DEFAULT_TIMEOUT_S, validators=[NumberRange(min=0.001)])
    backoff = NumberField(default=DEFAULT_BACKOFF_S, validators=[NumberRange(min=0)])
    temperature = NumberField(default=DEFAULT_TEMPERATURE, validators=[NumberRange(min=0)])
    max_output_tokens = fields.IntegerField(
        default=DEFAULT_MAX_OUTPUT_TOKENS, validators=[NumberRange(min=1)]
    )


class DocQaForm(Form):
    min_pairs = fields.IntegerField(default=DEFAULT_MIN_PAIRS, validators=[NumberRange(min=1)])
    banned_instruction_prefixes = StringListField(default=DEFAULT_BANNED_PREFIXES)
    banned_layout_words = StringListField(default=DEFAULT_BANNED_LAYOUT_WORDS)
    strip_punctuation = fields.StringField(default=DEFAULT_STRIP_PUNCTUATION)
    genre = fields.StringField(default=DEFAULT_DOC_GENRE, validators=[DataRequired()])
    language = fields.StringField(default="zh", validators=[AnyOf(LANGUAGES)])
    require_present_kind = fields.BooleanField(default=False)


def _check_task_matrix(data: t.Mapping[str, t.Sequence[str]]) -> TaskMatrix:
    return TaskMatrix.from_mapping(data)


class ChartForm(Form):
    topics = StringListField(default=DEFAULT_TOPICS, validators=[ListInputRequired()])
    locale = fields.StringField(default=DEFAULT_CHART_LOCALE, validators=[AnyOf(LANGUAGES)])
    language = fields.StringField(default="zh", validators=[AnyOf(LANGUAGES)])
    via = fields.StringField(default=RULE_BASED, validators=[AnyOf((RULE_BASED, LLM))])
    value_scale = NumberField(
        default=DEFAULT_VALUE_SCALE, validators=[NumberRange(min=0, max=0.95)]
    )
    width_min = fields.IntegerField(
        default=CHART_WIDTH_RANGE[0],
        validators=[NumberRange(min=200), NotGreaterThan("width_max")],
    )
    width_max = fields.IntegerField(default=CHART_WIDTH_RANGE[1], validators=[NumberRange(min=200)])
    height_min = fields.IntegerField(
        default=CHART_HEIGHT_RANGE[0],
        validators=[NumberRange(min=200), NotGreaterThan("height_max")],
    )
    height_max = fields.IntegerField(
        default=CHART_HEIGHT_RANGE[1], validators=[NumberRange(min=200)]
    )
    annotate = fields.BooleanField(default=True)
    mutations_per_seed = fields.IntegerField(default=1, validators=[NumberRange(min=1)])
    task_matrix = MappingField(
        default=dict, validators=[Callback(_check_task_matrix, (TaskMatrixError,))]
    )


class TableForm(Form):
    language = fields.StringField(default="zh", validators=[AnyOf(LANGUAGES)])
    min_pairs = fields.IntegerField(default=1, validators=[NumberRange(min=1)])


class PreprocessForm(Form):
    patch_px = fields.IntegerField(default=PATCH_PX, validators=[NumberRange(min=1)])
    train_threshold_min = fields.IntegerField(
        default=TRAIN_THRESHOLD_MIN,
        validators=[NumberRange(min=1), NotGreaterThan("train_threshold_max")],
    )
    train_threshold_max = fields.IntegerField(
        default=TRAIN_THRESHOLD_MAX, validators=[NumberRange(min=1)]
    )
    infer_upscale_min = NumberField(
        default=INFER_UPSCALE_MIN,
        validators=[NumberRange(min=0.01), NotGreaterThan("infer_upscale_max")],
    )
    infer_upscale_max = NumberField(default=INFER_UPSCALE_MAX, validators=[NumberRange(min=0.01)])
    low_res_cutoff = fields.IntegerField(default=LOW_RES_CUTOFF, validators=[NumberRange(min=1)])
    max_tokens = fields.IntegerField(default=None, validators=[OptionalValue(), NumberRange(min=1)])


class SourceForm(Form):
    name = fields.StringField(validators=[DataRequired()])
    size = fields.IntegerField(validators=[NumberRange(min=1)])
    is_synthetic = fields.BooleanField(default=False)
    weight = NumberField(default=1.0, validators=[NumberRange(min=1e-9)])


class MixForm(Form):
    target_synthetic_fraction = NumberField(
        default=DEFAULT_SYNTHETIC_FRACTION, validators=[OpenUnitInterval()]
    )
    plan = fields.StringField(default=None)
    sources = fields.FieldList(fields.FormField(SourceForm), default=list)


class AugmentForm(Form):
    max_ocr_chars = fields.IntegerField(
        default=DEFAULT_MAX_OCR_CHARS, validators=[NumberRange(min=1)]
    )
    min_mean_confidence = NumberField(
        default=DEFAULT_MIN_MEAN_CONFIDENCE, validators=[NumberRange(min=0, max=1)]
    )
    always = fields.BooleanField(default=False)
    never = fields.BooleanField(default=False, validators=[ExclusiveWith("always")])


class RunForm(Form):
    seed = fields.IntegerField(default=0, validators=[NumberRange(min=0)])
    workers = fields.IntegerField(default=1, validators=[NumberRange(min=1)])
    out_dir = fields.StringField(default="out", validators=[DataRequired()])
    layouts = fields.StringField(default="")
    chart_seeds = fields.StringField(default="")
    tables = fields.StringField(default="")
    group_by_image = fields.BooleanField(default=False)


SECTION_FORMS: dict[str, type[Form]] = {
    "gateway": GatewayForm,
    "docqa": DocQaForm,
    "chart": ChartForm,
    "table": TableForm,
    "preprocess": PreprocessForm,
    "mix": MixForm,
    "augment": AugmentForm,
    "run": RunForm,
}
