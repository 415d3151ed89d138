"""Report and summary schemas"""

import dataclasses

import marshmallow as ma

from ctpoir import REPORT_SCHEMA_VERSION
from ctpoir.extensions import Schema
from ctpoir.extensions.ma_fields import Probability


class VersionedSchema(Schema):
    schema_version = ma.fields.String(
        required=True,
        validate=ma.validate.Equal(REPORT_SCHEMA_VERSION),
        metadata={"description": "Report format version"},
    )

    @ma.pre_dump
    def add_version(self, data, **kwargs):
        return {"schema_version": REPORT_SCHEMA_VERSION, **vars_of(data)}

    @ma.post_load
    def drop_version(self, data, **kwargs):
        data.pop("schema_version")
        return data


def vars_of(obj):
    """Field values of a dataclass instance or a dict"""
    if isinstance(obj, dict):
        return obj
    return {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}


class SliceAreaSchema(Schema):
    slice_index = ma.fields.Integer(
        required=True,
        metadata={"description": "Slice z"},
    )
    lung_area_mm2 = ma.fields.Float(
        required=True,
        metadata={"description": "Lung area (mm²)"},
    )
    infected_area_mm2 = ma.fields.Float(
        required=True,
        metadata={"description": "Infected area (mm²)"},
    )


class CaseReportSchema(VersionedSchema):
    case_id = ma.fields.String(
        required=True,
        metadata={"description": "Case identifier"},
    )
    lung_volume_mm3 = ma.fields.Float(
        required=True,
        metadata={"description": "Intact lung volume (mm³)"},
    )
    infected_volume_mm3 = ma.fields.Float(
        required=True,
        metadata={"description": "Infected region volume (mm³)"},
    )
    poir_fraction = ma.fields.Float(
        required=True,
        metadata={"description": "Proportion of infected regions, as a fraction"},
    )
    poir_percent = ma.fields.Float(
        dump_only=True,
        metadata={"description": "Proportion of infected regions, in percent"},
    )
    per_slice = ma.fields.List(
        ma.fields.Nested(SliceAreaSchema),
        required=True,
        metadata={"description": "Per-slice areas"},
    )
    pipeline = ma.fields.Dict(
        keys=ma.fields.String(),
        required=True,
        metadata={"description": "Stage parameters and scorer provenance"},
    )

    @ma.pre_dump
    def add_version(self, data, **kwargs):
        data = super().add_version(data, **kwargs)
        data["poir_percent"] = data["poir_fraction"] * 100
        return data

    @ma.pre_load
    def drop_percent(self, data, **kwargs):
        # Derived from poir_fraction
        return {k: v for k, v in data.items() if k != "poir_percent"}


class SummaryRowSchema(Schema):
    method = ma.fields.String(
        required=True,
        metadata={"description": "Method label"},
    )
    structure = ma.fields.String(
        required=True,
        validate=ma.validate.OneOf(("intact lung", "infected region")),
    )
    m_dice = Probability(
        required=True,
        metadata={"description": "Mean Dice over cases"},
    )
    n_cases = ma.fields.Integer(
        required=True,
        metadata={"description": "Number of cases the mean runs over"},
    )
    improvement_percent = ma.fields.Float(
        allow_none=True,
        load_default=None,
        metadata={"description": "Relative m-Dice change vs the base method"},
    )


class PoirPairSchema(Schema):
    case_id = ma.fields.String(required=True)
    predicted = ma.fields.Float(required=True)
    ground_truth = ma.fields.Float(required=True)


class ClassifierSummarySchema(Schema):
    n = ma.fields.Integer(required=True)
    auc = Probability(required=True)
    threshold = Probability(
        required=True,
        metadata={"description": "Operating threshold (keep score >= threshold)"},
    )
    accuracy = Probability(required=True)
    best_threshold = ma.fields.Float(required=True)
    best_accuracy = Probability(required=True)


class MetricsSummarySchema(VersionedSchema):
    rows = ma.fields.List(
        ma.fields.Nested(SummaryRowSchema),
        required=True,
        metadata={"description": "m-Dice per method and structure"},
    )
    poir_method = ma.fields.String(
        allow_none=True,
        required=True,
        metadata={"description": "Method whose masks give predicted PoIR"},
    )
    poir_pairs = ma.fields.List(
        ma.fields.Nested(PoirPairSchema),
        required=True,
        metadata={"description": "(predicted, ground truth) PoIR per case"},
    )
    pearson_r = ma.fields.Float(
        allow_none=True,
        required=True,
        metadata={"description": "Pearson's r over PoIR pairs"},
    )
    mape_percent = ma.fields.Float(
        allow_none=True,
        required=True,
        metadata={"description": "Mean absolute percent error of PoIR"},
    )
    classifier = ma.fields.Nested(
        ClassifierSummarySchema,
        allow_none=True,
        load_default=None,
        metadata={"description": "Region classifier ROC statistics"},
    )
