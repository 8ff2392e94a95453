from pydantic_settings import BaseSettings, SettingsConfigDict

class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", extra="ignore")

    APP_NAME: str = "Platypoos Planner"
    APP_ENV: str = "dev"
    LOG_LEVEL: str = "INFO"

    DATABASE_URL: str = "sqlite:///./runs.db"

    DEFAULT_SEED: int = 0
    SWEEP_JOBS: int = 1

    # oracle truncation tolerance (tail certificate)
    ORACLE_TOL: float = 1e-3

    # toy MDP knobs
    TOY_R_MAX: float = 130.0
    REWARD_SHIFT: float = 100.0

    TRACE_DIR: str | None = None

settings = Settings()
