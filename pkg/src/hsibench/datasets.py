"""Built-in descriptors for the five benchmark dataset configurations and the
consolidated class vocabularies they are relabeled into.

Native taxonomies are placeholders except where the source vocabulary is
common knowledge (the 19 urban-scene classes, the 2-class road dataset); the
shipped relabel maps are editable configuration, not fixed truth.
"""

from __future__ import annotations

from .core import ClassTaxonomy, DatasetDescriptor

__all__ = [
    "CONSOLIDATED_6",
    "CONSOLIDATED_8",
    "ROAD_2",
    "builtin_descriptors",
    "HS_CITY_TRAIN_SHAPE",
]

# Shared 6-class vocabulary used after relabeling the 10/19-class sources.
CONSOLIDATED_6 = ClassTaxonomy(
    name="consolidated-6",
    classes=(
        (0, "Road"),
        (1, "Vegetation"),
        (2, "Sky"),
        (3, "Metal"),
        (4, "Infrastructure"),
        (5, "People"),
    ),
)

# The drive dataset keeps Road Marking and Glass on top of the shared six.
CONSOLIDATED_8 = ClassTaxonomy(
    name="consolidated-8",
    classes=CONSOLIDATED_6.classes + ((6, "Road Marking"), (7, "Glass")),
)

ROAD_2 = ClassTaxonomy(name="road-2", classes=((0, "Road"), (1, "Others")))

_URBAN_19 = ClassTaxonomy(
    name="urban-19",
    classes=tuple(
        enumerate(
            [
                "road", "sidewalk", "building", "wall", "fence", "pole",
                "traffic light", "traffic sign", "vegetation", "terrain",
                "sky", "person", "rider", "car", "truck", "bus", "train",
                "motorcycle", "bicycle",
            ]
        )
    ),
)


def _generic(name: str, k: int) -> ClassTaxonomy:
    return ClassTaxonomy(name=name, classes=tuple((i, f"class_{i}") for i in range(k)))


# Spatial dimension of the largest dataset after the training-time subsample.
HS_CITY_TRAIN_SHAPE = (355, 472)


def builtin_descriptors() -> dict[str, DatasetDescriptor]:
    """Descriptors for the five benchmark configurations, keyed by name."""
    rows = [
        ("hyko2-vis", 254, 512, 15, 10, (470.0, 630.0), 163, _generic("hyko2-vis-native", 10)),
        ("hyko2-nir", 214, 407, 25, 10, (630.0, 975.0), 78, _generic("hyko2-nir-native", 10)),
        ("hsi-drive-v2", 209, 416, 25, 9, (600.0, 975.0), 752, _generic("hsi-drive-v2-native", 9)),
        ("hs-city-v2", 1422, 1889, 128, 19, (450.0, 950.0), 1330, _URBAN_19),
        ("hsi-road", 384, 192, 25, 2, (680.0, 960.0), 3799, ROAD_2),
    ]
    return {
        name: DatasetDescriptor(
            name=name,
            height=h,
            width=w,
            bands=c,
            num_classes=k,
            wavelength_range_nm=rng,
            declared_image_count=n,
            taxonomy=tax,
        )
        for name, h, w, c, k, rng, n, tax in rows
    }
