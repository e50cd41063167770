import os
from dataclasses import dataclass, field, asdict


DEFAULT_LEVELS = (0, 5, 10, 15, 20)


def _parse_levels(raw):
    """Parse a comma separated list of percentile levels ('0,5,10')"""
    return tuple(int(part) for part in raw.split(',') if part.strip())


class Config:
    """Base configuration"""
    # Experiment defaults
    SEED = int(os.environ.get('FAIRONB_SEED', '30'))
    FOLDS = int(os.environ.get('FAIRONB_FOLDS', '5'))
    LEVELS = _parse_levels(os.environ.get('FAIRONB_LEVELS', '0,5,10,15,20'))
    JOBS = int(os.environ.get('FAIRONB_JOBS', '1'))
    ASSESS = os.environ.get('FAIRONB_ASSESS', 'dataset')

    # Logging
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')
    LOG_DIR = os.environ.get('LOG_DIR', 'logs')

    DEBUG = False
    TESTING = False


class DevelopmentConfig(Config):
    """Development configuration"""
    DEBUG = True
    TESTING = False


class ProductionConfig(Config):
    """Production configuration"""
    DEBUG = False
    TESTING = False


class TestingConfig(Config):
    """Testing configuration"""
    DEBUG = True
    TESTING = True
    JOBS = 1
    LOG_LEVEL = 'WARNING'


def get_config():
    """Get configuration based on environment"""
    env = os.environ.get('FAIRONB_ENV', 'development')

    if env == 'production':
        return ProductionConfig()
    elif env == 'testing':
        return TestingConfig()
    else:
        return DevelopmentConfig()


@dataclass
class RunConfig:
    """Everything one CLI invocation needs; echoed to runconfig.json"""
    command: str
    data: str = None
    schema: str = None
    out: str = 'runs'
    seed: int = Config.SEED
    folds: int = Config.FOLDS
    levels: tuple = DEFAULT_LEVELS
    strategies: tuple = ('union', 'intersection')
    pct: tuple = None
    fawos_weights: tuple = None
    fawos_factors: tuple = None
    assess: str = 'dataset'
    jobs: int = 1
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_config(cls, command, config, **overrides):
        """Layer explicit overrides (None means 'not given') on top of a Config"""
        values = {
            'seed': config.SEED,
            'folds': config.FOLDS,
            'levels': tuple(config.LEVELS),
            'jobs': config.JOBS,
            'assess': config.ASSESS,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(command=command, **values)

    def to_dict(self):
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = list(value)
        return data
