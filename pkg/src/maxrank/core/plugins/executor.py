"""Method Executor - Run methods group by group with parallel support"""
import asyncio
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from typing import Any, Callable, Dict, Iterable, List

from ...utils.debug import get_debugger


class MethodExecutor:
    """Executes methods in dependency order; a group runs concurrently"""

    def __init__(self, max_workers: int = 4):
        self.max_workers = max_workers
        self.debugger = get_debugger()

    async def execute_group_async(
        self,
        methods: Dict[str, Any],
        group: List[str],
        jobs: Dict[str, Dict[str, Any]],
    ) -> Dict[str, Dict[str, Any]]:
        """
        Execute a group of methods concurrently.

        Args:
            methods: Loaded plugin instances
            group: Method names to execute
            jobs: Per-method job {tensor, tol, seed}

        Returns:
            {method_name: {status, decomposition}}
        """
        async def run(name: str):
            method = methods.get(name)
            if method is None:
                self.debugger.error("executor", "Method not loaded", method=name)
                return name, self._error_result("NotLoaded")

            started = time.time()
            try:
                result = await asyncio.to_thread(method.execute, jobs[name])
            except Exception as e:
                self.debugger.error("executor", "Method execution error", method=name, error=str(e))
                return name, self._error_result(type(e).__name__, str(e))
            duration_ms = int((time.time() - started) * 1000)

            status = result.get('status', {})
            if status.get('success'):
                self.debugger.info("executor", "Method succeeded", method=name, duration_ms=duration_ms,
                                   terms=len(result['decomposition']))
            else:
                self.debugger.warn("executor", "Method failed", method=name, duration_ms=duration_ms,
                                   error=status.get('error'))
            return name, result

        results = await asyncio.gather(*(run(name) for name in group))
        return dict(results)

    def execute_group(
        self,
        methods: Dict[str, Any],
        group: List[str],
        jobs: Dict[str, Dict[str, Any]],
    ) -> Dict[str, Dict[str, Any]]:
        """
        Sync wrapper for execute_group_async.

        Inside a running event loop the group runs on its own loop in a worker thread.
        """
        coro = self.execute_group_async(methods, group, jobs)
        try:
            asyncio.get_running_loop()
        except RuntimeError:
            return asyncio.run(coro)
        with ThreadPoolExecutor(max_workers=1) as pool:
            return pool.submit(asyncio.run, coro).result()

    def execute_pipeline(
        self,
        methods: Dict[str, Any],
        groups: List[List[str]],
        jobs: Dict[str, Dict[str, Any]],
    ) -> Dict[str, Any]:
        """
        Run every group in order.

        Returns:
            {method_name: result, ..., 'status': {success_methods, failed_methods, ...}}
        """
        started = datetime.now()
        results: Dict[str, Any] = {}
        succeeded, failed = [], []

        for idx, group in enumerate(groups):
            group = [name for name in group if name in jobs]
            if not group:
                continue
            self.debugger.debug("executor", f"Executing group {idx}", methods=", ".join(group))
            for name, result in self.execute_group(methods, group, jobs).items():
                results[name] = result
                (succeeded if result['status'].get('success') else failed).append(name)

        finished = datetime.now()
        results['status'] = {
            'success_methods': succeeded,
            'failed_methods': failed,
            'success': bool(succeeded),
            'started_at': started.isoformat(),
            'finished_at': finished.isoformat(),
            'duration_ms': int((finished - started).total_seconds() * 1000),
        }
        return results

    def map_trials(self, fn: Callable[[Any], Any], items: Iterable[Any]) -> List[Any]:
        """fn over independent items on the thread pool, results in input order"""
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            return list(pool.map(fn, items))

    def _error_result(self, error: str, detail: str = None) -> Dict[str, Any]:
        now = datetime.now().isoformat()
        return {
            'status': {
                'success': False,
                'error': error,
                'detail': detail,
                'started_at': now,
                'finished_at': now,
                'duration_ms': 0,
            },
            'decomposition': None,
        }
