#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Funções auxiliares reutilizáveis pelo simulador.

Contém a configuração de logs, a leitura de variáveis de ambiente e do
arquivo de configuração, a validação do SimConfig e a exportação das
tabelas (CSV, metadados e Parquet). Não depende do Prefect, para ser
compartilhada entre simular.py, tasks.py e flows.py.
"""

import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd
import psutil
import pyarrow as pa
import pyarrow.parquet as pq
from dotenv import dotenv_values, load_dotenv
from marshmallow import (
    Schema,
    ValidationError,
    fields,
    post_load,
    validates_schema,
)
from marshmallow.validate import OneOf, Range

try:
    from pythonjsonlogger.json import JsonFormatter
except ImportError:  # python-json-logger < 3
    from pythonjsonlogger.jsonlogger import JsonFormatter

from constants import (
    CHAVES_SAIDA,
    CONVENCAO_SNR,
    DETECTORES_LINEARES,
    DETECTORES_SD,
    DIRETORIO_EXPORTS_PADRAO,
    ENERGIA_SIMBOLO_PADRAO,
    ESQUEMAS_CLI,
    FORMATO_FLOAT_CSV,
    MODULACOES_SUPORTADAS,
    PROJECT_ROOT,
    VERSAO_FORMATO,
)
from detect import InverseProvider
from erros import ErroConfiguracao, ErroMimo

logger = logging.getLogger(__name__)

_FORMATO_TEXTO = '%(asctime)s [%(levelname)s] %(name)s: %(message)s'
_CAMPOS_JSON = '%(asctime)s %(levelname)s %(name)s %(message)s'
_handler_instalado: Optional[logging.Handler] = None


# ---------------------------------------------------------------------------
# Ambiente e logs
# ---------------------------------------------------------------------------

def carregar_ambiente() -> None:
    load_dotenv(dotenv_path=PROJECT_ROOT / '.env')


def obter_variavel(nome: str, obrigatoria: bool = False, padrao: str = None) -> Optional[str]:
    """Retorna variável de ambiente com validação opcional."""
    valor = os.getenv(nome, padrao)
    if obrigatoria and (not valor or (isinstance(valor, str) and not valor.strip())):
        raise ErroConfiguracao(f"Variável obrigatória não encontrada: {nome}. Verifique o arquivo .env")
    return valor.strip() if isinstance(valor, str) else valor


def configurar_logs(formato: Optional[str] = None, nivel: Optional[str] = None) -> logging.Handler:
    """Instala um handler no logger raiz, em texto ou JSON (python-json-logger).

    Chamadas repetidas substituem o handler anterior.
    """
    global _handler_instalado

    formato = (formato or obter_variavel('MIMO_LOG_FORMAT', padrao='texto')).lower()
    nivel = (nivel or obter_variavel('MIMO_LOG_LEVEL', padrao='INFO')).upper()
    if formato not in ('texto', 'json'):
        raise ErroConfiguracao(f"Formato de log inválido: {formato!r} (use texto ou json)")
    if nivel not in logging._nameToLevel:
        raise ErroConfiguracao(f"Nível de log inválido: {nivel!r}")

    handler = logging.StreamHandler(sys.stderr)
    if formato == 'json':
        handler.setFormatter(JsonFormatter(_CAMPOS_JSON))
    else:
        handler.setFormatter(logging.Formatter(_FORMATO_TEXTO))

    raiz = logging.getLogger()
    if _handler_instalado is not None:
        raiz.removeHandler(_handler_instalado)
    raiz.addHandler(handler)
    raiz.setLevel(nivel)
    _handler_instalado = handler
    return handler


def workers_padrao() -> int:
    """MIMO_WORKERS ou o número de núcleos físicos."""
    valor = obter_variavel('MIMO_WORKERS')
    if valor:
        try:
            workers = int(valor)
            if workers < 1:
                raise ValueError
            return workers
        except ValueError:
            raise ErroConfiguracao(f"MIMO_WORKERS inválido: {valor!r}")
    return psutil.cpu_count(logical=False) or 1


def diretorio_exports() -> Path:
    valor = obter_variavel('MIMO_EXPORT_DIR')
    return Path(valor) if valor else DIRETORIO_EXPORTS_PADRAO


# ---------------------------------------------------------------------------
# SimConfig
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    n_rx: int
    n_users: int
    modulation: int
    snr_db_list: Tuple[float, ...]
    trials: int
    master_seed: int
    detector: str
    inverse: InverseProvider
    workers: int
    k_list: Tuple[int, ...] = ()
    es: float = ENERGIA_SIMBOLO_PADRAO


class _ListaSeparada(fields.Field):
    """Lista de números vinda de '0,2,4' (texto) ou de uma sequência."""

    def __init__(self, conversor, **kwargs):
        super().__init__(**kwargs)
        self.conversor = conversor

    def _deserialize(self, value, attr, data, **kwargs):
        if isinstance(value, str):
            partes = [p.strip() for p in value.split(',') if p.strip()]
        elif isinstance(value, (list, tuple)):
            partes = list(value)
        else:
            raise ValidationError('Esperada lista separada por vírgulas.')
        try:
            return tuple(self.conversor(p) for p in partes)
        except (TypeError, ValueError) as e:
            raise ValidationError(f'Valor inválido na lista: {e}') from e


class _CampoInversa(fields.Field):
    def _deserialize(self, value, attr, data, **kwargs):
        if isinstance(value, InverseProvider):
            return value
        try:
            return InverseProvider.parse(str(value))
        except ErroConfiguracao as e:
            raise ValidationError(str(e)) from e


class SimConfigSchema(Schema):
    """Valida o dicionário mesclado (nomes iguais às flags da CLI)."""

    n_rx = fields.Integer(data_key='n', required=True, validate=Range(min=1))
    n_users = fields.Integer(data_key='k_users', required=True, validate=Range(min=1))
    modulation = fields.Integer(data_key='mod', load_default=4, validate=OneOf(MODULACOES_SUPORTADAS))
    snr_db_list = _ListaSeparada(float, data_key='snr', required=True)
    trials = fields.Integer(required=True, validate=Range(min=1))
    master_seed = fields.Integer(data_key='seed', load_default=0, validate=Range(min=0))
    detector = fields.String(load_default='zf', validate=OneOf(DETECTORES_LINEARES + DETECTORES_SD))
    inverse = _CampoInversa(load_default='exact')
    workers = fields.Integer(load_default=None, allow_none=True, validate=Range(min=1))
    k_list = _ListaSeparada(int, load_default=())
    es = fields.Float(load_default=ENERGIA_SIMBOLO_PADRAO, validate=Range(min=0, min_inclusive=False))

    @validates_schema
    def validar_dimensoes(self, data, **kwargs):
        if data.get('n_rx', 0) < data.get('n_users', 0):
            raise ValidationError('Exige n >= k_users.', 'n')
        if not data.get('snr_db_list'):
            raise ValidationError('Lista de SNR vazia.', 'snr')
        if any(k < 0 for k in data.get('k_list', ())):
            raise ValidationError('k_list com valores negativos.', 'k_list')

    @post_load
    def criar(self, data, **kwargs) -> SimConfig:
        if data.get('inverse') == 'exact':
            data['inverse'] = InverseProvider.exact()
        if data.get('workers') is None:
            data['workers'] = workers_padrao()
        return SimConfig(**data)


def ler_arquivo_config(caminho) -> Dict[str, str]:
    """Arquivo plano ``chave = valor`` com os nomes das flags (``-`` vira ``_``)."""
    caminho = Path(caminho)
    if not caminho.is_file():
        raise ErroConfiguracao(f"Arquivo de configuração não encontrado: {caminho}")
    valores = dotenv_values(caminho)
    return {
        chave.strip().lower().replace('-', '_'): valor
        for chave, valor in valores.items()
        if valor is not None
    }


class OpcoesSaidaSchema(Schema):
    """Opções de saída da CLI, aceitas também no arquivo de configuração."""

    out = fields.String(load_default=None, allow_none=True)
    parquet = fields.Boolean(load_default=False)
    log_format = fields.String(load_default=None, allow_none=True, validate=OneOf(('texto', 'json')))


def opcoes_saida(flags: Optional[Dict] = None, arquivo=None) -> Dict:
    """``out``, ``parquet`` e ``log_format`` com flags > arquivo.

    Flags ``None`` ou ``False`` contam como ausentes.
    """
    valores: Dict = {}
    if arquivo:
        valores.update({c: v for c, v in ler_arquivo_config(arquivo).items() if c in CHAVES_SAIDA})
    valores.update({c: v for c, v in (flags or {}).items() if c in CHAVES_SAIDA and v not in (None, False)})
    try:
        return OpcoesSaidaSchema().load(valores)
    except ValidationError as e:
        raise ErroConfiguracao(f"Opções de saída inválidas: {e.messages}") from e


def montar_config(flags: Optional[Dict] = None, arquivo=None, padroes: Optional[Dict] = None) -> SimConfig:
    """Mescla padrões < .env < arquivo < flags e valida com SimConfigSchema.

    Raises:
        ErroConfiguracao: qualquer erro de validação, antes de rodar tentativas.
    """
    valores: Dict = dict(padroes or {})
    workers_env = obter_variavel('MIMO_WORKERS')
    if workers_env:
        valores['workers'] = workers_env
    if arquivo:
        valores.update(ler_arquivo_config(arquivo))
    valores.update({chave: valor for chave, valor in (flags or {}).items() if valor is not None})
    for chave in CHAVES_SAIDA:
        valores.pop(chave, None)

    esquema = valores.pop('scheme', None)
    if esquema is not None:
        if esquema not in ESQUEMAS_CLI:
            raise ErroConfiguracao(f"Esquema inválido: {esquema!r} (use {', '.join(ESQUEMAS_CLI)})")
        valores['detector'] = ESQUEMAS_CLI[esquema]

    try:
        return SimConfigSchema().load(valores)
    except ValidationError as e:
        raise ErroConfiguracao(f"Configuração inválida: {e.messages}") from e


# ---------------------------------------------------------------------------
# Exportação
# ---------------------------------------------------------------------------

def metadados_config(cfg: SimConfig, **extras) -> Dict:
    """Metadados gravados ao lado da tabela; sem carimbo de tempo."""
    meta = {
        'versao_formato': VERSAO_FORMATO,
        'convencao_snr': CONVENCAO_SNR,
        'n_rx': cfg.n_rx,
        'n_users': cfg.n_users,
        'modulation': cfg.modulation,
        'es': cfg.es,
        'snr_db_list': list(cfg.snr_db_list),
        'trials': cfg.trials,
        'master_seed': cfg.master_seed,
        'detector': cfg.detector,
        'inverse': str(cfg.inverse),
    }
    if cfg.k_list:
        meta['k_list'] = list(cfg.k_list)
    meta.update(extras)
    return meta


def tabela(registros: Iterable[Dict], colunas: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame(list(registros), columns=list(colunas))


def exportar_tabela(
    df: pd.DataFrame,
    caminho,
    metadados: Optional[Dict] = None,
    parquet: bool = False,
) -> List[Path]:
    """Grava CSV (9 algarismos significativos, LF), ``.meta.json`` e, se pedido, Parquet.

    Returns:
        Lista de arquivos gravados, CSV primeiro.
    """
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(caminho, float_format=FORMATO_FLOAT_CSV, lineterminator='\n', index=False)
    gravados = [caminho]

    if metadados is not None:
        caminho_meta = caminho.with_name(caminho.name + '.meta.json')
        caminho_meta.write_text(
            json.dumps(metadados, indent=2, sort_keys=True, ensure_ascii=False) + '\n',
            encoding='utf-8',
        )
        gravados.append(caminho_meta)

    if parquet:
        caminho_parquet = caminho.with_suffix('.parquet')
        table = pa.Table.from_pandas(df, preserve_index=False)
        if metadados is not None:
            existentes = dict(table.schema.metadata or {})
            existentes[b'mimo'] = json.dumps(metadados, sort_keys=True).encode('utf-8')
            table = table.replace_schema_metadata(existentes)
        pq.write_table(table, caminho_parquet, compression='snappy')
        gravados.append(caminho_parquet)

    logger.info("Tabela exportada: %s (%d linhas)", caminho, len(df))
    return gravados


def descrever_erro(erro: Exception) -> str:
    if isinstance(erro, ErroMimo):
        return f"{type(erro).__name__}: {erro}"
    return repr(erro)
