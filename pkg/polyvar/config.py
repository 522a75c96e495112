from pydantic import BaseModel
from pydantic_settings import BaseSettings, SettingsConfigDict


class LimitsConfig(BaseModel):
    max_dim: int = 8
    max_pieces: int = 16
    max_constraints: int = 32
    max_terms: int = 4


class OracleConfig(BaseModel):
    k_min: int = 4
    k_max: int = 20
    grid_points: int = 5
    final_window: int = 4
    member_tol: float = 1e-6
    non_member_floor: float = 1e-3
    angular_tol: float = 1e-3
    sample_radii: list[float] = [1e-2, 1e-3, 1e-4]
    directions_per_axis: int = 5
    calm_ratio: float = 1e6
    calm_budget: int = 24
    seed: int = 0


class ReportConfig(BaseModel):
    format: str = "json"
    width: int = 100


class RunConfig(BaseModel):
    concurrency: int = 4


class Settings(BaseSettings):
    limits: LimitsConfig = LimitsConfig()
    oracle: OracleConfig = OracleConfig()
    report: ReportConfig = ReportConfig()
    run: RunConfig = RunConfig()

    model_config = SettingsConfigDict(
        env_prefix="POLYVAR_",
        env_nested_delimiter="__",
        env_file=".env",
        extra="ignore",
    )


CONFIG = Settings()


def show_config(settings: Settings = CONFIG, console=None) -> None:
    from rich.console import Console
    from rich.panel import Panel

    console = console or Console()
    for section, values in settings.model_dump().items():
        console.print(
            Panel.fit(
                str(values),
                title=f"[bold blue]{section}[/bold blue]",
                border_style="green",
            )
        )
