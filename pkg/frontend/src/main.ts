import { ApiClient, ApiError } from './api';
import { AlphaSlider } from './alphaSlider';
import { collapseBanner, formatDeviation } from './deviation';
import { runSimulation } from './jobs';
import { drawPlanarPreview } from './preview';
import type { LayoutRejection } from './types';

const $ = (id: string) => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
};

async function init(): Promise<void> {
  const api = new ApiClient('');
  const status = $('status');
  const sliderEl = $('alpha') as HTMLInputElement;
  const readout = $('alpha-value');
  const canvas = $('preview') as HTMLCanvasElement;
  const devEl = $('deviation');
  const simBtn = $('simulate') as HTMLButtonElement;
  const gravityEl = $('gravity') as HTMLInputElement;

  const domain = await api.getAlphaDomain();
  if (domain.intervals.length === 0) {
    status.textContent = 'no feasible corner angle: the patch cannot deploy';
    sliderEl.disabled = true;
    simBtn.disabled = true;
    return;
  }
  const slider = new AlphaSlider(domain.intervals);
  sliderEl.min = String(slider.min);
  sliderEl.max = String(slider.max);
  sliderEl.step = 'any';
  sliderEl.value = String(slider.value);

  async function refreshLayout(): Promise<void> {
    status.textContent = 'computing layout…';
    try {
      const layout = await api.postLayout(slider.value);
      const ctx = canvas.getContext('2d');
      if (ctx) drawPlanarPreview(ctx, layout, canvas.width, canvas.height);
      status.textContent = `layout ok at alpha = ${slider.value.toFixed(4)}`;
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        const rej = err.detail as LayoutRejection;
        const snapped = slider.snapBack(rej.intervals);
        sliderEl.value = String(snapped);
        readout.textContent = snapped.toFixed(4);
        status.textContent = `${rej.message}; snapped back to ${snapped.toFixed(4)}`;
      } else {
        status.textContent = `layout failed: ${String(err)}`;
      }
    }
  }

  sliderEl.addEventListener('input', () => {
    const adopted = slider.set(Number(sliderEl.value));
    sliderEl.value = String(adopted);
    readout.textContent = adopted.toFixed(4);
  });
  sliderEl.addEventListener('change', () => void refreshLayout());

  simBtn.addEventListener('click', async () => {
    simBtn.disabled = true;
    devEl.textContent = '';
    try {
      const job = await runSimulation(api, gravityEl.checked, undefined, {
        onUpdate: (j) => {
          status.textContent = `simulation ${j.job_id}: ${j.status}`;
        },
      });
      const dev = formatDeviation(job.result!.deviation);
      devEl.textContent =
        `NRMSE ${dev.nrmse} · mean ${dev.mean} m · ` +
        `${dev.samples} samples · f = ${dev.scale}`;
    } catch (err) {
      devEl.textContent = String(err);
    } finally {
      simBtn.disabled = false;
    }
  });

  readout.textContent = slider.value.toFixed(4);
  await refreshLayout();
}

export { collapseBanner, init };

if (typeof document !== 'undefined' && document.getElementById('alpha')) {
  void init();
}
