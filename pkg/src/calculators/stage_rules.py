"""Growth stage rules for processing tomato."""

from typing import Optional

from ..models.phenology import PRE_VEGETATIVE, StageTable
from ..models.errors import PhenologyError


class StageRules:
    """Stage lookup and the synthetic preset used for each sampled stage."""

    TABLE = StageTable.tomato()

    # Infected leaves hold less water early in the season; the contrast reverses later
    SYNTH_PRESETS = {
        "vegetative": "early",
        "flowering": "early",
        "fruit development": "late",
        "ripening": "late",
    }

    @classmethod
    def stage_of(cls, gdd: float, table: Optional[StageTable] = None) -> str:
        """
        Name the growth stage reached at an accumulated GDD.

        Args:
            gdd: Accumulated growing degree days (°C·day), >= 0
            table: Stage table, tomato stages by default

        Returns:
            The last stage whose threshold is <= gdd, or "pre-vegetative"
        """
        if gdd < 0:
            raise PhenologyError("accumulated GDD must be >= 0")
        table = table or cls.TABLE
        current = PRE_VEGETATIVE
        for name, threshold in table.stages:
            if gdd >= threshold:
                current = name
            else:
                break
        return current

    @classmethod
    def stage_index(cls, gdd: float, table: Optional[StageTable] = None) -> int:
        """0 for pre-vegetative, then 1..n along the table."""
        table = table or cls.TABLE
        name = cls.stage_of(gdd, table)
        return 0 if name == PRE_VEGETATIVE else table.names.index(name) + 1

    @classmethod
    def synth_preset(cls, stage_gdd: float) -> str:
        """Synthetic preset for a sampling stage; pre-vegetative samples use "early"."""
        return cls.SYNTH_PRESETS.get(cls.stage_of(stage_gdd), "early")
