"""Output formatters for CLI display."""

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from rdmnet.schemas import BaselineFit, EvalReport, LrFindResult, Stage, TrainHistory

console = Console()

STAGE_COLORS = {
    Stage.FROZEN: "cyan",
    Stage.UNFROZEN: "green",
}


def format_train_summary(history: TrainHistory, lr: float, weights_path: str, tail: int = 5) -> None:
    """Summary panel plus the first and last few epochs of a run."""
    if not history.records:
        console.print(Panel("[dim]No epochs run; weights saved at initialization.[/dim]", title="Training"))
        console.print(f"[dim]Weights: {weights_path}[/dim]")
        return

    first, last = history.records[0], history.records[-1]
    ratio = last.mean_loss / first.mean_loss if first.mean_loss > 0 else float("nan")
    console.print(
        Panel(
            f"[bold]{len(history)}[/bold] epochs "
            f"({len(history.stage_records(Stage.FROZEN))} frozen, "
            f"{len(history.stage_records(Stage.UNFROZEN))} unfrozen) at lr {lr:.4g}\n"
            f"loss {first.mean_loss:.5f} -> {last.mean_loss:.5f} [dim](x{ratio:.3f})[/dim]",
            title="[bold]Training[/bold]",
            border_style="green",
        )
    )

    table = Table(show_header=True, header_style="bold", box=None)
    table.add_column("Epoch", justify="right")
    table.add_column("Stage")
    table.add_column("LR", justify="right")
    table.add_column("Mean loss", justify="right")

    records = history.records
    shown = records if len(records) <= 2 * tail else records[:tail] + records[-tail:]
    for index, record in enumerate(shown):
        if len(records) > 2 * tail and index == tail:
            table.add_row("...", "", "", "")
        color = STAGE_COLORS[record.stage]
        table.add_row(
            str(record.epoch),
            f"[{color}]{record.stage.value}[/{color}]",
            f"{record.lr:.4g}",
            f"{record.mean_loss:.6f}",
        )
    console.print(table)
    console.print(f"[dim]Weights: {weights_path}[/dim]")


def format_lr_find(result: LrFindResult, curve_path: str) -> None:
    status = "[yellow]stopped early on divergence[/yellow]" if result.aborted_early else "full sweep"
    console.print(
        Panel(
            f"suggested lr [bold]{result.suggested_lr:.4g}[/bold]\n"
            f"{len(result.lrs)} points, {result.lrs[0]:.3g} .. {result.lrs[-1]:.3g}, {status}",
            title="[bold]LR range test[/bold]",
            border_style="cyan",
        )
    )
    console.print(f"[dim]Curve: {curve_path}[/dim]")


def format_baseline(fit: BaselineFit, layer_names: list[str], fitted_path: str) -> None:
    """Weights per layer RDM, the intercept and the fit's Spearman correlation."""
    table = Table(title="Baseline fit", show_header=True, header_style="bold")
    table.add_column("Term", style="cyan")
    table.add_column("Weight", justify="right")
    for name, weight in zip(layer_names, fit.weights, strict=True):
        table.add_row(name, f"{weight:.6f}")
    table.add_row("[dim]intercept[/dim]", f"{fit.intercept:.6f}")
    console.print(table)
    console.print(f"spearman_r [bold]{fit.spearman_r:.6f}[/bold]")
    console.print(f"[dim]Fitted RDM: {fitted_path}[/dim]")


def format_eval_note(report: EvalReport) -> str | None:
    """Warning line for reports whose explained variance hides a negative correlation."""
    if report.sign_collapsed:
        return (
            f"[yellow]{report.target_name}: spearman_r is {report.spearman_r:.4f}; "
            "explained variance squares away the sign[/yellow]"
        )
    return None
